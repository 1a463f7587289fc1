//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside its mathematical domain (e.g. `d <= -1`).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The input data admit no answer (constant series, zero variance, ...).
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// An iterative numerical method failed to converge within its budget.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// A fitted or implied model violates stationarity/invertibility.
    #[error("unstable model: {0}")]
    Unstable(String),

    /// Bad experiment or CLI configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A Monte Carlo cell exceeded its replication failure budget.
    #[error("experiment cell failed: {0}")]
    CellFailed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
