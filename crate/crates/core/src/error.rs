use thiserror::Error;

use crate::encoding::BudgetViolation;
use crate::phe::KeyId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("prime generation failed after {0} candidates")]
    PrimeGeneration(u32),

    #[error("unsupported key size {0} bits (supported: 512, 1024, 2048, 4096)")]
    UnsupportedKeySize(u64),

    #[error("encoding error: {0}")]
    Encoding(String),

    #[error("ciphertext under key {found} used with key {expected}")]
    WrongKey { expected: KeyId, found: KeyId },

    #[error("malformed ciphertext: {0}")]
    MalformedCiphertext(String),

    #[error("scale mismatch: {left} vs {right} (rescale first)")]
    ScaleMismatch { left: u32, right: u32 },

    #[error(transparent)]
    Budget(#[from] BudgetViolation),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("owner {0} is unavailable; session aborted")]
    OwnerUnavailable(usize),

    #[error("session is closed")]
    SessionClosed,

    #[error("session was aborted: {0}")]
    Aborted(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("data error{}: {msg}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Data { line: Option<usize>, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn protocol(msg: impl Into<String>) -> Self {
        Error::Protocol(msg.into())
    }

    pub(crate) fn data(line: Option<usize>, msg: impl Into<String>) -> Self {
        Error::Data { line, msg: msg.into() }
    }
}
