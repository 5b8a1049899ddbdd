use std::path::PathBuf;

use thiserror::Error;

/// Failure of a command, carrying its process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Sim(#[from] nessim::Error),

    #[error("{failed} of {total} expectations not met")]
    Mismatch { failed: usize, total: usize },
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Self::Io { path: path.into(), source }
    }

    pub fn config(path: impl Into<PathBuf>, message: impl ToString) -> Self {
        Self::Config { path: path.into(), message: message.to_string() }
    }

    /// 1 usage/config, 2 numerical failure, 3 expectation mismatch.
    pub fn exit_code(&self) -> i32 {
        use nessim::Error as E;
        match self {
            Self::Usage(_) | Self::Config { .. } | Self::Io { .. } => 1,
            Self::Sim(E::Config(_) | E::Parameter(_) | E::DomainTooSmall { .. }) => 1,
            Self::Sim(_) => 2,
            Self::Mismatch { .. } => 3,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
