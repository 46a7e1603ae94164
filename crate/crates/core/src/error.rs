//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("validation failed: {0}")]
    Validation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("LAPACK routine {routine} failed with info = {info}")]
    Lapack { routine: &'static str, info: i32 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(
        "matrix logarithm branch ambiguity: eigenvalue {value} lies within {margin} of the \
         negative real axis; reduce the Trotter step tau"
    )]
    LogBranch { value: String, margin: f64 },

    #[error("stationary state is not unique: nullspace dimension {0}")]
    DegenerateSteadyState(usize),

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 for configuration problems, 3 for
    /// numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Dimension(_) | Error::Validation(_) | Error::Config(_) | Error::Io(_)
            | Error::Json(_) => 2,
            Error::Lapack { .. }
            | Error::Numerical(_)
            | Error::LogBranch { .. }
            | Error::DegenerateSteadyState(_) => 3,
        }
    }
}
