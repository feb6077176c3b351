use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates an input contract (shape, sign, symmetry).
    #[error("invalid input: {0}")]
    Validation(String),

    /// The input is well formed but outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A matrix that must be inverted is too close to singular.
    #[error("ill-conditioned matrix: minimum eigenvalue {min_eigenvalue:e} (norm {norm:e})")]
    Conditioning { min_eigenvalue: f64, norm: f64 },

    /// An iterative routine hit its iteration cap.
    #[error("{routine} did not converge after {iterations} iterations (residual {residual:e})")]
    NotConverged {
        routine: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("semidefinite program is infeasible: {0}")]
    Infeasible(String),

    #[error("semidefinite program is unbounded: {0}")]
    Unbounded(String),

    #[error("{failed} of {total} trials failed, above the {budget_percent}% failure budget; last error: {last}")]
    FailureBudget {
        failed: usize,
        total: usize,
        budget_percent: f64,
        last: String,
    },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{}:{line}: {message}", path.display())]
    Config {
        path: PathBuf,
        line: usize,
        message: String,
    },
}

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
