use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("graph is disconnected")]
    DisconnectedGraph,
    #[error("invalid edge ({u}, {v}): {reason}")]
    InvalidEdge { u: usize, v: usize, reason: String },
    #[error("graph needs at least 2 vertices, got {0}")]
    GraphTooSmall(usize),
    #[error("graph generation failed after {attempts} attempts: {reason}")]
    GenerationFailed { attempts: usize, reason: String },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("interval ({t}, {u}] is outside [0, {horizon}]")]
    IntervalOutOfRange { t: f64, u: f64, horizon: f64 },
    #[error("state space of size {size} exceeds cap {cap}")]
    StateSpaceTooLarge { size: u128, cap: usize },
    #[error("distributions live on different state spaces")]
    SpaceMismatch,
    #[error("invalid particle tuple: {0}")]
    InvalidTuple(String),
    #[error("value {value} out of range: {what}")]
    OutOfRange { value: i64, what: &'static str },
    #[error("no absorption within {cap} steps")]
    AbsorptionCapExceeded { cap: u64 },
    #[error("sample index {index} out of range for {size} states")]
    IndexOutOfRange { index: usize, size: usize },
    #[error("invalid path family: {0}")]
    InvalidPathFamily(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
