use thiserror::Error;

/// Errors raised by tensor-train construction and algebra.
#[derive(Error, Debug)]
pub enum TtError {
    #[error("index error: {0}")]
    Index(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("capacity exceeded: {requested} entries requested, cap is {cap}")]
    Capacity { requested: usize, cap: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A sketched interpolation step found no pivots although its input
    /// was nonzero. Rerunning with a different seed usually recovers.
    #[error("degenerate sketch at site {site} after {attempts} attempt(s)")]
    DegenerateSketch { site: usize, attempts: usize },

    #[error("non-finite value at site {site}, entry {entry:?}")]
    NonFinite { site: usize, entry: Vec<usize> },

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error("malformed tensor-train file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TtError>;
