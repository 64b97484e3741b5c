//! Error type shared across the crate.
//!
//! Every fallible operation returns [`Result`]. Variants are grouped by the
//! kind of misuse they report so that callers (in particular the command-line
//! harness) can map them onto coarse exit categories without string matching.

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A vector or matrix argument had the wrong length for the operation.
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    /// An input contained a NaN or infinity where a finite value is required.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    /// A scalar parameter was outside its admissible range.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A matrix that must be symmetric positive definite failed the check.
    #[error("matrix is not positive definite ({context})")]
    NotPositiveDefinite { context: &'static str },

    /// A zeroth-order oracle was asked to evaluate outside the feasible set.
    #[error("infeasible query point at round {round} (coordinate {coordinate})")]
    InfeasibleQuery { round: u64, coordinate: usize },

    /// A bound evaluator or step-size rule needed a constant that was not
    /// supplied (for example a smoothness certificate for error bounds).
    #[error("missing constant {name}: {reason}")]
    MissingConstant { name: &'static str, reason: String },

    /// A step size violated the threshold required by the guarantee it
    /// claims (for example eta >= 1/alpha in the weakly smooth regime).
    #[error("step size {eta} violates the required threshold {threshold} ({context})")]
    StepSizeThreshold {
        eta: f64,
        threshold: f64,
        context: &'static str,
    },

    /// An iterative solver exhausted its iteration budget before meeting
    /// its tolerance.
    #[error("{solver} did not converge within {max_iter} iterations (last residual {residual})")]
    NoConvergence {
        solver: &'static str,
        max_iter: u64,
        residual: f64,
    },

    /// A configuration file or flag set could not be interpreted.
    #[error("configuration error: {0}")]
    Config(String),

    /// An experiment run failed after configuration was accepted.
    #[error("run failure: {0}")]
    Run(String),

    /// Reading or writing an output artifact failed.
    #[error("I/O failure on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Builds an [`Error::Io`] tagged with the offending path.
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
