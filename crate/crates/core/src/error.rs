use thiserror::Error;

use crate::types::Answer;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolation(String),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("period string must be non-empty")]
    EmptyQ,
    #[error("threshold k={k} outside [1..{m}]")]
    BadK { k: usize, m: usize },
    #[error("more than {limit} occurrences but no period string verified")]
    StructureNotFound { limit: usize },
    #[error("epoch update budget exhausted; rebuild required")]
    EpochExhausted,
    #[error("period string is not primitive")]
    NonPrimitiveQ,
    #[error("universe [-{universe}..{universe}) needs m >= {needed}, got {m}")]
    UniverseTooLarge { universe: i64, needed: usize, m: usize },
    #[error("divergence at op {op_index}: got {got}, expected {expected}")]
    DivergenceDetected {
        op_index: usize,
        got: Answer,
        expected: Answer,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("character {code} outside alphabet of size {sigma}")]
    BadChar { code: u32, sigma: u32 },
    #[error("workload format: {0}")]
    Format(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
