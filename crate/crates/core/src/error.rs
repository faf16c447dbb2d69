use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the limbgo library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate marker cluster: {0}")]
    DegenerateCluster(String),

    #[error("point lists differ in length ({reference} reference vs {current} current)")]
    MismatchedLength { reference: usize, current: usize },

    #[error("degenerate sphere fit: {0}")]
    DegenerateSphere(String),

    #[error("degenerate anatomical frame for {segment}: {reason}")]
    DegenerateFrame { segment: String, reason: String },

    #[error("degenerate subject geometry: {0}")]
    DegenerateGeometry(String),

    #[error("missing marker(s): {}", .0.join(", "))]
    MissingMarkers(Vec<String>),

    #[error("unknown marker(s) not present in the model: {}", .0.join(", "))]
    UnknownMarkers(Vec<String>),

    #[error("empty series")]
    EmptySeries,

    #[error("infeasible start: {0}")]
    InfeasibleStart(String),

    #[error("invalid recording: {0}")]
    InvalidRecording(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
