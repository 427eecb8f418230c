use std::path::PathBuf;

use thiserror::Error;

/// Error type shared by every simulator layer.
#[derive(Debug, Error)]
pub enum Error {
    /// A UE sits at distance zero from a transmitter, so path loss is
    /// undefined.
    #[error("degenerate geometry: a UE is collocated with a transmitter")]
    DegenerateGeometry,

    /// The layout has neither MBSs nor UABSs, so no UE can be served.
    #[error("no serving candidates: layout contains no base stations")]
    NoServingCandidates,

    #[error("invalid layout: {0}")]
    InvalidLayout(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("config error: {0}")]
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

impl Error {
    /// Attaches a file path to an I/O error.
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Reports a malformed records or config file.
    pub fn format(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}
