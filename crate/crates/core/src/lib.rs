//! Column generation for the fractional graph coloring bound, with
//! prediction-guided dual stabilization.
//!
//! The numerical core is generic over [`scalar::Scalar`] (`f64`, `f32` and
//! exact `BigRational`); the aliases below fix the production type.

pub mod colgen;
pub mod error;
pub mod graph;
pub mod lp;
pub mod predict;
pub mod pricing;
pub mod scalar;

pub use colgen::{
    run_colgen, CgConfig, CgResult, CgStatus, IterationRecord, PricingMode, StabKind, StabPolicy,
};
pub use error::{Error, Result};
pub use graph::{Column, Graph};
pub use scalar::Scalar;

pub type Lp = lp::LinearProgram<f64>;
pub type ExactLp = lp::LinearProgram<num_rational::BigRational>;
pub type Dual = lp::DualVector<f64>;
pub type ExactDual = lp::DualVector<num_rational::BigRational>;
pub type Pricing = pricing::PricingResult<f64>;
pub type CgRun = colgen::CgResult<f64>;
