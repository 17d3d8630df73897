//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation
    /// (odd weight, weight too small, wrong residue class, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A combination spec violates the oddness hypotheses required for the
    /// valuation guarantees. Builders may override with an explicit force
    /// flag for negative controls.
    #[error("hypothesis violation: {0}")]
    Hypothesis(String),

    /// A q-series handed to the Faber eliminator is not the expansion of a
    /// modular form of the claimed weight: a nonzero residual survives at the
    /// recorded q-power.
    #[error("input is not a weight-{weight} form: nonzero residual at q^{power}")]
    NotAForm { weight: u64, power: i64 },

    /// A text file does not conform to one of the exchange formats.
    #[error("format error: {0}")]
    Format(String),

    /// Underlying I/O failure.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
