use rsi_core::TtError;
use thiserror::Error;

#[derive(Error, Debug)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Tt(#[from] TtError),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, BenchError>;

/// Exit status for the command-line tool: 2 for unusable input or
/// configuration, 3 for failures inside the numerics.
pub fn exit_code(err: &BenchError) -> i32 {
    match err {
        BenchError::Tt(e) => match e {
            TtError::Config(_)
            | TtError::Shape(_)
            | TtError::Index(_)
            | TtError::Format(_)
            | TtError::Io(_) => 2,
            TtError::Capacity { .. }
            | TtError::Domain(_)
            | TtError::DegenerateSketch { .. }
            | TtError::NonFinite { .. }
            | TtError::Linalg(_) => 3,
        },
        BenchError::Config(_) | BenchError::Format(_) | BenchError::Csv(_) | BenchError::Json(_) => 2,
        BenchError::Io(_) => 2,
    }
}
