use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("mode index {index} out of range for {count} modes")]
    ModeIndex { index: usize, count: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("dwell-time mismatch: {0} vs {1}")]
    TauMismatch(f64, f64),
    #[error("empty set")]
    EmptySet,
    #[error("basis does not span invariant subspaces (residual {0:e})")]
    NotInvariant(f64),
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
