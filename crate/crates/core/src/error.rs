use thiserror::Error;

/// Errors produced by this crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A mathematical domain constraint was violated (bad exponent, bad
    /// probability, argument outside the function's domain, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Two inputs that must have equal length do not.
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    /// Two point clouds (or a point and a cloud) live in different dimensions.
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    /// A distribution failed its structural invariants.
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// Exact enumeration was requested but the outcome space is too large.
    /// Callers may fall back to Monte Carlo estimation.
    #[error("enumeration budget exceeded: {needed:.3e} tuples > budget {budget:.3e}")]
    BudgetExceeded { needed: f64, budget: f64 },

    /// A KL-based loss or gradient is infinite because the target has an atom
    /// the model assigns zero probability (or does not cover at all).
    #[error("KL loss is infinite: target atom {atom} has zero model probability")]
    InfiniteKl { atom: f64 },

    /// An iterative run produced a non-finite value and was aborted.
    #[error("run aborted at step {step}: {reason}")]
    Aborted { step: usize, reason: String },

    /// A data file could not be parsed.
    #[error("parse error at row {row}: {msg}")]
    Parse { row: usize, msg: String },

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
