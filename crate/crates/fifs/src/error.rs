use thiserror::Error;

/// Everything that can go wrong across construction, iteration, and IO.
#[derive(Debug, Error)]
pub enum Error {
    /// Data set violates a structural invariant (length, ordering, finiteness).
    #[error("invalid data: {0}")]
    InvalidData(String),

    /// Scaling vector outside the admissible open interval (-1, 1).
    #[error("invalid scaling: {0}")]
    InvalidScaling(String),

    /// An operation was called outside its domain (bad argument, missing
    /// precondition) in a way that is not an IO or convergence problem.
    #[error("domain error: {0}")]
    Domain(String),

    /// Index argument out of range.
    #[error("index out of range: {0}")]
    Index(String),

    /// Seam policy cannot be applied to the given grid.
    #[error("policy error: {0}")]
    Policy(String),

    /// Fixed-point iteration hit max_iter before reaching the tolerance.
    #[error("no convergence after {iterations} iterations (last residual {last_residual:e})")]
    NonConvergence {
        iterations: usize,
        last_residual: f64,
    },

    /// Point-set operation would exceed the configured memory guard.
    #[error("resource limit exceeded: {0}")]
    Resource(String),

    /// Input text could not be parsed; carries a location when known.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
