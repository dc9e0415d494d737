//! Error type shared across the library.

use thiserror::Error;

/// Failure modes surfaced to callers.
///
/// Configuration and hypothesis failures are user-fixable and map to CLI
/// exit code 3; the remaining variants are runtime failures and map to 4.
/// A completed run whose verification report fails is not an `Error`.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid or inconsistent configuration input.
    #[error("config: {0}")]
    Config(String),

    /// A theorem hypothesis required by the selected case does not hold
    /// (or is not numerically visible) for the given model and parameters.
    #[error("hypothesis: {0}")]
    Hypothesis(String),

    /// Interval certification produced fewer intervals than requested.
    #[error("interval search: found {found} of {requested} requested intervals ({detail})")]
    IntervalSearch {
        found: usize,
        requested: usize,
        detail: String,
    },

    /// No test amplitude satisfies the energy inequality for some level.
    #[error("no test amplitude for level {level}: {detail}")]
    NoTestAmplitude { level: usize, detail: String },

    /// A numerical routine left its domain of validity.
    #[error("numerical: {0}")]
    Numerical(String),

    /// Filesystem failure while reading config or writing reports.
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code the CLI maps this error to.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Hypothesis(_) => 3,
            _ => 4,
        }
    }
}
