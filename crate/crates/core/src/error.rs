use thiserror::Error;

/// Errors raised by the model, surrogate and optimization layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The upper surrogate's denominator left the positive half-line; the
    /// caller should shrink the step toward the reference point.
    #[error("surrogate denominator non-positive, shrink the step")]
    ShrinkStep,

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("convex solver failed: {0}")]
    Solver(String),

    #[error("no feasible point: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
