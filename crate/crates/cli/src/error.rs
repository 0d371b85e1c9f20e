use std::path::PathBuf;

use thiserror::Error;

/// Failures of a CLI command, each mapped to a process exit status.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error("{origin}: {msg}")]
    Config { origin: String, msg: String },

    #[error(transparent)]
    Core(#[from] despeckle_core::Error),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub const EXIT_USAGE: i32 = 1;
    pub const EXIT_DIVERGENCE: i32 = 2;
    pub const EXIT_IO: i32 = 3;

    pub fn exit_code(&self) -> i32 {
        use despeckle_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Config { .. } => Self::EXIT_USAGE,
            CliError::Io { .. } => Self::EXIT_IO,
            CliError::Core(e) => match e {
                E::Divergence { .. } => Self::EXIT_DIVERGENCE,
                E::Io { .. } | E::CorruptPayload(_) | E::Unsupported(_) => Self::EXIT_IO,
                _ => Self::EXIT_USAGE,
            },
        }
    }

    pub(crate) fn config(origin: impl Into<String>, msg: impl Into<String>) -> Self {
        CliError::Config {
            origin: origin.into(),
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
