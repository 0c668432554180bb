use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument {value} outside the domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("invalid degree/order index (k={k}, j={j}); require 1 <= j <= 2k+1")]
    InvalidIndex { k: usize, j: usize },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("cubature rule is exact to degree {available}, but degree {required} is required")]
    InsufficientExactness { required: usize, available: usize },

    #[error("radius mismatch: expected {expected}, got {actual}")]
    RadiusMismatch { expected: f64, actual: f64 },

    #[error("degree mismatch: {0}")]
    DegreeMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("Newton iteration for the Gauss-Legendre rule of size {n} did not converge")]
    NonConvergence { n: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("evaluation grid is empty")]
    EmptyGrid,

    #[error("quasi-optimality needs at least two candidate solutions, got {0}")]
    TooFewSolutions(usize),

    #[error("reference function has zero norm")]
    ZeroNorm,
}

pub type Result<T> = std::result::Result<T, Error>;
