//! Crate-wide error type.

use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Incompatible operand shapes; the message names both sides.
    DimensionMismatch(String),
    /// A non-finite value (NaN/inf) where a finite real is required.
    NonFinite(String),
    /// A combinatorial or size guard would be exceeded; the message names
    /// the guard and the offending value.
    GuardExceeded(String),
    /// A parameter is outside its admissible domain.
    InvalidParameter(String),
    /// The simplex iteration cap was hit before termination.
    IterationLimit {
        cap: usize,
    },
    /// An iterative solver did not meet its tolerance within its budget.
    NonConvergence {
        iterations: usize,
        residual: f64,
    },
    /// Exhaustive search ended without a feasible solution.
    NoSolution(String),
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch(m) => write!(f, "dimension mismatch: {m}"),
            Error::NonFinite(m) => write!(f, "non-finite value: {m}"),
            Error::GuardExceeded(m) => write!(f, "guard exceeded: {m}"),
            Error::InvalidParameter(m) => write!(f, "invalid parameter: {m}"),
            Error::IterationLimit { cap } => {
                write!(f, "simplex iteration cap exceeded (cap = {cap})")
            }
            Error::NonConvergence {
                iterations,
                residual,
            } => write!(
                f,
                "no convergence after {iterations} iterations (residual {residual:.3e})"
            ),
            Error::NoSolution(m) => write!(f, "no solution: {m}"),
            Error::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
