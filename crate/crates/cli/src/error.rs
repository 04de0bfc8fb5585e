use std::path::PathBuf;

use thiserror::Error;

/// Errors surfaced by a CLI command, each tied to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },

    #[error("invalid config: {0}")]
    Config(String),

    #[error("invalid data file {path}: {reason}")]
    Data { path: PathBuf, reason: String },

    #[error(transparent)]
    Numeric(#[from] magnon_core::Error),

    #[error("fit did not converge (stopped by {0})")]
    NotConverged(String),

    #[error("cannot write output: {0}")]
    Write(String),
}

impl CliError {
    /// 2 for unreadable or invalid input, 3 for numeric domain errors,
    /// 4 for fits that did not converge, 1 for output failures.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Read { .. } | CliError::Config(_) | CliError::Data { .. } => 2,
            CliError::Numeric(_) => 3,
            CliError::NotConverged(_) => 4,
            CliError::Write(_) => 1,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Write(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Write(e.to_string())
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
