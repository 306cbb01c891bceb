use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("edge list is empty")]
    EmptyInput,

    #[error("graph is disconnected ({components} components)")]
    Disconnected { components: usize },

    #[error("node {node} out of range for graph with {n} nodes")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("invalid edge ({0}, {1}): self-loops and duplicate edges are not allowed")]
    InvalidEdge(usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("graph too large for exhaustive enumeration: {what} = {value} exceeds {limit}")]
    TooLarge {
        what: &'static str,
        value: usize,
        limit: usize,
    },

    #[error("{0}")]
    Unsupported(String),

    #[error("{method} failed at p = {p}: {source}")]
    Sweep {
        method: String,
        p: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("series length {got} does not match grid length {expected}")]
    GridMismatch { expected: usize, got: usize },

    #[error("integrity check failed for {name}: expected (N={expected_n}, M={expected_m}), found (N={n}, M={m})")]
    Integrity {
        name: String,
        expected_n: usize,
        expected_m: usize,
        n: usize,
        m: usize,
    },

    #[error("fetch of {url} failed after {attempts} attempts: {message}")]
    Fetch {
        url: String,
        attempts: usize,
        message: String,
    },

    #[error("{0} is not cached and offline mode is enabled")]
    NotCached(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("config: {0}")]
    Config(String),
}

/// Coarse failure classes, used by the CLI to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Usage,
    Numerical,
    Io,
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parse { .. }
            | Error::EmptyInput
            | Error::NodeOutOfRange { .. }
            | Error::InvalidEdge(..)
            | Error::InvalidParameter(_)
            | Error::Config(_)
            | Error::GridMismatch { .. } => ErrorClass::Usage,
            Error::Disconnected { .. }
            | Error::TooLarge { .. }
            | Error::Unsupported(_) => ErrorClass::Numerical,
            Error::Sweep { source, .. } => source.class(),
            Error::Integrity { .. }
            | Error::Fetch { .. }
            | Error::NotCached(_)
            | Error::Io { .. }
            | Error::Json(_)
            | Error::Csv(_) => ErrorClass::Io,
        }
    }
}
