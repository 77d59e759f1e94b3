use std::path::PathBuf;

use thiserror::Error;

use crate::spectral::Eigensolve;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// The iteration cap was hit. `best` holds the last iterate so callers
    /// that only need its sign pattern can still use it.
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        best: Box<Eigensolve>,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("noise calibration failed: {0}")]
    Calibration(String),

    #[error("bound is undefined for these parameters: {0}")]
    Infeasible(String),

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),

    #[error("sweep spec: {0}")]
    Spec(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
