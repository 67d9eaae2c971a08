use thiserror::Error;

/// Errors surfaced by any stage of the toolchain.
#[derive(Debug, Error)]
pub enum SurfqError {
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("schedule invariant violated at timestamp {timestamp}, cell ({row},{col}): {msg}")]
    ScheduleInvariant {
        timestamp: usize,
        row: u32,
        col: u32,
        msg: String,
    },

    #[error("surface allocation failed: {0}")]
    Allocation(String),

    #[error("lowering error: {0}")]
    Lowering(String),

    #[error("non-Clifford instruction encountered: {0}")]
    NonClifford(String),

    #[error("detector error model: {0}")]
    Dem(String),

    #[error("decoder error: {0}")]
    Decoder(String),

    #[error("task graph error: {0}")]
    TaskGraph(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SurfqError>;
