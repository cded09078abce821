//! Experiment orchestration for the column generation solver: run cells,
//! oracles, aggregation, dual trajectories and training data collection.

pub mod dataset;
pub mod error;
pub mod methods;
pub mod oracle;
pub mod pca;
pub mod report;
pub mod runner;
pub mod verify;

pub use error::{BenchError, Result};
pub use methods::{Method, Predictor};
pub use runner::{solve, Instance, Models, RunRecord, SolveOptions};
