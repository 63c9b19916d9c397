//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by race construction, bound evaluation, coding, and the
/// experiment drivers.
#[derive(Debug, Error)]
pub enum Error {
    /// Every weight in the pool is zero (log-weight `-inf`), or the pool is
    /// empty: no index can win the race.
    #[error("degenerate weights: {0}")]
    DegenerateWeights(String),

    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A rank arrived that the configured integer coder cannot represent.
    #[error("rank {0} exceeds coder capacity {1}")]
    RankOutOfRange(u64, u64),

    /// The bit source ended mid-codeword.
    #[error("truncated code stream: {0}")]
    TruncatedCode(String),

    /// Config text failed to parse or validate; `line` is 1-based (0 for
    /// file-level problems).
    #[error("config error (line {line}, field `{field}`): {msg}")]
    Config {
        line: usize,
        field: String,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParam(msg.into())
    }

    pub fn config(line: usize, field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config {
            line,
            field: field.into(),
            msg: msg.into(),
        }
    }
}
