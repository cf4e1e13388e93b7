use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the network-control toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unstable: {0}")]
    Unstable(String),

    #[error("uncontrollable: lambda_min = {lambda_min:e} does not exceed tolerance {tol:e}{context}")]
    Uncontrollable {
        lambda_min: f64,
        tol: f64,
        context: String,
    },

    #[error("matrix is not diagonalizable (smallest singular value of eigenvector matrix {sigma_min:e})")]
    NotDiagonalizable { sigma_min: f64 },

    #[error("matrix is not symmetric: {0}")]
    NotSymmetric(String),

    #[error("graph is disconnected: {0}")]
    Disconnected(String),

    #[error("search space of {count} subsets exceeds the cap of {cap}; use Algorithm-1 selection instead")]
    CapExceeded { count: u128, cap: u128 },

    #[error("cancellation identity violated: {0}")]
    Cancellation(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("simulation check failed: {what} (residual {residual:e}, tolerance {tol:e})")]
    Simulation { what: String, residual: f64, tol: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by I/O rather than by the inputs' content.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}
