use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = CliError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot access {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    /// `what` names the offending file or flag.
    #[error("malformed {what}: {message}")]
    Format { what: String, message: String },
    #[error(transparent)]
    Pipeline(wpid_core::Error),
}

impl CliError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    pub(crate) fn format(what: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Format { what: what.into(), message: message.into() }
    }
}

impl From<wpid_core::Error> for CliError {
    fn from(e: wpid_core::Error) -> Self {
        match e {
            wpid_core::Error::Io { path, source } => CliError::Io { path, source },
            wpid_core::Error::Format { path, message } => CliError::Format { what: path.display().to_string(), message },
            wpid_core::Error::Config(message) => CliError::Config(message),
            other => CliError::Pipeline(other),
        }
    }
}
