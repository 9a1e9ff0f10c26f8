use std::path::PathBuf;

use thiserror::Error;

/// Failure of a subcommand, mapped onto the process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Validation(String),
    /// A prerequisite solve did not converge; nothing was written.
    #[error("{0}")]
    NotConverged(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Parse(_) => 2,
            CliError::Validation(_) => 3,
            CliError::NotConverged(_) => 4,
        }
    }
}

impl From<rhor_core::Error> for CliError {
    fn from(e: rhor_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

/// How a command that produced its outputs finished.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    /// Outputs were written but the run did not meet its stopping criteria.
    NotConverged,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::NotConverged => 4,
        }
    }
}
