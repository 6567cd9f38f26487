//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors reported by `ktf-core` operations.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument violated a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A residue that must be a unit shares a factor with the modulus.
    #[error("{value} is not a unit modulo {modulus}")]
    NotAUnit { value: i64, modulus: u64 },
    /// Moduli handed to the Chinese remainder theorem are not coprime.
    #[error("moduli {0} and {1} are not coprime")]
    NonCoprimeModuli(u64, u64),
    /// The evaluation point is a pole of the function.
    #[error("pole: {0}")]
    Pole(String),
    /// The J-Bessel power series was asked for an argument above its cutoff.
    #[error("argument {x} exceeds the power-series cutoff {cutoff}")]
    SeriesCutoff { x: f64, cutoff: f64 },
    /// A quadrature or series did not reach the requested tolerance.
    #[error("tolerance not met: {0}")]
    Tolerance(String),
    /// A precondition of an identity does not hold, so the identity is not asserted.
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Input data (files, rows) failed validation.
    #[error("data error: {0}")]
    Data(String),
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
