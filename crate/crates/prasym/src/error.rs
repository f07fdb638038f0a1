use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller-supplied parameter is out of range or inconsistent.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// The graph violates a structural precondition (isolated vertex,
    /// empty graph, asymmetric edge list, ...).
    #[error("structural error: {0}")]
    Structure(String),

    /// A dense-oracle path was requested above its size limit.
    #[error("size {n} exceeds dense limit {limit}")]
    Size { n: usize, limit: usize },

    /// Malformed input while parsing a graph or vector file.
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn parameter(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }

    pub fn structure(msg: impl Into<String>) -> Self {
        Error::Structure(msg.into())
    }
}
