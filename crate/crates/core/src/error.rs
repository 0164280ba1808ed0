use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("edge {edge} out of range for {edges} edges")]
    EdgeOutOfRange { edge: usize, edges: usize },

    #[error("index {index} out of range for vector of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("hypergraph has no edges")]
    EmptyHypergraph,

    #[error("invalid hypergraph: {0}")]
    InvalidHypergraph(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown scheduler `{name}` (available: {available})")]
    UnknownScheduler { name: String, available: String },

    #[error("scheduler `{scheduler}` does not support {what}")]
    Unsupported { scheduler: String, what: String },

    #[error("worker thread panicked: {0}")]
    WorkerPanic(String),

    #[error("{msg} (line {line})")]
    Parse { line: usize, msg: String },

    #[error("cannot open {}", path.display())]
    Open {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// True for errors caused by the input data rather than by how the
    /// library was called.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. }
                | Error::Open { .. }
                | Error::Io(_)
                | Error::InvalidHypergraph(_)
                | Error::EmptyHypergraph
        )
    }
}
