use std::path::PathBuf;

use thiserror::Error;

use crate::model::{SensorId, TraceId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cutoff {cutoff_hz} Hz is not below the Nyquist frequency of a {rate_hz} Hz stream")]
    NyquistViolation { cutoff_hz: f64, rate_hz: f64 },

    #[error("sensor {sensor} does not overlap the frame clock")]
    EmptyOverlap { sensor: SensorId },

    #[error("identification rate is undefined: no frame identified anyone")]
    UndefinedRate,

    #[error("no ground truth for {0}")]
    UnknownId(UnknownId),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UnknownId {
    Trace(TraceId),
    Sensor(SensorId),
}

impl std::fmt::Display for UnknownId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            UnknownId::Trace(id) => write!(f, "trace {id}"),
            UnknownId::Sensor(id) => write!(f, "sensor {id}"),
        }
    }
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format { path: path.into(), message: message.into() }
    }
}
