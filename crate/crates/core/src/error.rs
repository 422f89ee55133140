use thiserror::Error;

/// Errors raised by the arithmetic kernels, the verifier and the constructions.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("refused: {0}")]
    Refused(String),
    #[error("search budget exhausted: {what} (degree cap {cap})")]
    SearchExhausted { what: String, cap: u32 },
    #[error("divisor is not principal")]
    NotPrincipal,
    #[error("class is not 2-divisible")]
    NotTwoDivisible,
    #[error("enumeration bound exceeded: q = {q} > {bound}")]
    BoundExceeded { q: u32, bound: u32 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
