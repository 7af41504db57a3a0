//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by the library and the command-line pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// Invalid argument, configuration value or dataset shape.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Malformed data file. Row and column are 1-based and refer to the
    /// location in the file, header included.
    #[error("parse error in {path} at row {row}, column {column}: {message}")]
    Parse {
        path: String,
        row: usize,
        column: usize,
        message: String,
    },

    /// A linear system or greedy update became numerically unreliable.
    #[error("numerical stability: {0}")]
    Stability(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn stability(msg: impl Into<String>) -> Self {
        Error::Stability(msg.into())
    }

    /// Process exit code for the CLI: 1 for input and parse problems,
    /// 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stability(_) => 2,
            _ => 1,
        }
    }
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
