//! Harness errors and their exit codes.

use std::path::PathBuf;

use commitlab_core::Error as CoreError;

/// Errors of the harness, grouped by process exit code.
#[derive(Debug, thiserror::Error)]
pub enum AppError {
    /// Invalid or inconsistent configuration (exit code 2).
    #[error("config error: {0}")]
    Config(String),
    /// Malformed input data or insufficient coverage (exit code 3).
    #[error("data error: {0}")]
    Data(String),
    /// The LP solver did not reach an optimum (exit code 4).
    #[error("solver failure: {0}")]
    Solver(String),
    /// File system failure (exit code 3).
    #[error("{}: {source}", path.display())]
    Io {
        /// File involved.
        path: PathBuf,
        /// Underlying error.
        source: std::io::Error,
    },
}

impl AppError {
    /// Process exit code.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 2,
            AppError::Data(_) | AppError::Io { .. } => 3,
            AppError::Solver(_) => 4,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> AppError {
        let path = path.into();
        move |source| AppError::Io { path, source }
    }
}

impl From<CoreError> for AppError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Config(_) | CoreError::Commitment { .. } => AppError::Config(e.to_string()),
            CoreError::Solver(_) => AppError::Solver(e.to_string()),
            _ => AppError::Data(e.to_string()),
        }
    }
}

impl From<csv::Error> for AppError {
    fn from(e: csv::Error) -> Self {
        AppError::Data(e.to_string())
    }
}

/// Harness result.
pub type Result<T, E = AppError> = std::result::Result<T, E>;
