use num_complex::Complex64;
use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("spectral point violates the weighted sum constraint (residual {residual:e})")]
    Constraint { residual: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("matrix is singular")]
    Singular,

    #[error("pole of {function} at {location}")]
    Pole { function: &'static str, location: Complex64 },

    #[error("argument 1 reached in factor ({j}, {l}); value not reported")]
    PoleRisk { j: usize, l: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("missing Hecke data for prime {0}")]
    MissingPrime(u64),

    #[error("form mismatch: {0}")]
    FormMismatch(String),

    #[error("{what} did not reach tolerance {tolerance:e}: estimate {estimate}, discrepancy {discrepancy:e}")]
    Tolerance {
        what: &'static str,
        estimate: Complex64,
        discrepancy: f64,
        tolerance: f64,
    },

    #[error("computation cancelled")]
    Cancelled,

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
