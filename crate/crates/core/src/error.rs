use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("dimension mismatch: expected {expected}, got {actual} ({context})")]
    DimensionMismatch {
        expected: usize,
        actual: usize,
        context: &'static str,
    },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("refusing {what} on {n} vertices (limit {limit})")]
    GuardLimit {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("LP solver failure: {0}")]
    Lp(String),

    #[error("numerical trouble: {0}")]
    Numerical(String),

    #[error("training diverged at epoch {epoch}: {message}")]
    Training { epoch: usize, message: String },

    #[error("invalid model: {0}")]
    Model(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
