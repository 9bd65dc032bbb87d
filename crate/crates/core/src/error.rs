use thiserror::Error;

/// Errors produced by the estimation library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimMismatch { expected: usize, got: usize },

    #[error("point {point:?} lies outside the domain")]
    OutOfDomain { point: Vec<f64> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Cholesky factorization failed at maximum jitter {max_jitter:e}")]
    CholeskyFailure { max_jitter: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("intensity bound violated: rho(z) = {value} exceeds rho_upper = {bound}")]
    BoundViolation { value: f64, bound: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("empty post-burn-in trace segment")]
    EmptyTrace,
}

pub type Result<T> = std::result::Result<T, Error>;
