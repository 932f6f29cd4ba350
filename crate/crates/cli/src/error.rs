use std::path::PathBuf;

use thiserror::Error;

/// Exit code for bad input files, flags or configuration.
pub const EXIT_INPUT: i32 = 2;
/// Exit code for numerical failures (singular systems, divergence,
/// unreachable destinations).
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}, line {line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numeric(String),
    #[error(transparent)]
    Model(#[from] reclogit_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Parse { .. } | CliError::Input(_) => EXIT_INPUT,
            CliError::Numeric(_) => EXIT_NUMERIC,
            CliError::Model(e) if e.is_input_error() => EXIT_INPUT,
            CliError::Model(_) => EXIT_NUMERIC,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub fn parse(path: impl Into<PathBuf>, line: u64, message: impl Into<String>) -> Self {
        CliError::Parse { path: path.into(), line, message: message.into() }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
