use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{context} is not Hermitian (relative deviation {deviation:.3e})")]
    NotHermitian { context: String, deviation: f64 },
    #[error("jump {index} is not traceless (|tr| = {trace:.3e}); normalize the jumps first")]
    NotTraceless { index: usize, trace: f64 },
    #[error("dimension {dim} exceeds the dense-method guard of {max}")]
    DimensionTooLarge { dim: usize, max: usize },
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("{0}")]
    NotConverged(String),
    #[error("step refinement exhausted at t = {time}: estimated error {error:.3e} above tolerance {tol:.3e}")]
    RefinementExhausted { time: f64, error: f64, tol: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
