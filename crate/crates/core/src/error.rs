use thiserror::Error;

/// Errors returned by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("code length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("invalid code dimensions: N={n}, K={k}, r={r}")]
    InvalidDimensions { n: usize, k: usize, r: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("state {state} out of range 0..={max}")]
    StateOutOfRange { state: usize, max: usize },

    #[error("steady state did not converge after {0} iterations")]
    NonConvergence(usize),

    #[error("performance loss undefined: eps_l = 0 with Pr(overflow) = {0}")]
    UndefinedLoss(f64),

    #[error("malformed code file: {0}")]
    CodeFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;
