use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::traffic::CalibrationFailure;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("insufficient data: need at least {needed} samples, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate series: {0}")]
    DegenerateSeries(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{0}")]
    Calibration(Box<CalibrationFailure>),

    #[error("tick {tick} is outside a series of length {len}")]
    SimulationBounds { tick: usize, len: usize },

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("malformed csv: {0}")]
    Csv(String),
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 1 for configuration, validation and I/O problems,
    /// 2 for runtime numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Validation(_) | Error::Io { .. } | Error::Csv(_) => 1,
            Error::InsufficientData { .. }
            | Error::DegenerateSeries(_)
            | Error::Domain(_)
            | Error::Calibration(_)
            | Error::SimulationBounds { .. }
            | Error::Internal(_) => 2,
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}
