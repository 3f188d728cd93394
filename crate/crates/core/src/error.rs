use thiserror::Error;

/// Errors raised by the solver library.
#[derive(Debug, Error)]
pub enum SseError {
    /// An argument lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An exhaustive enumeration would exceed its configured cap.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// Inputs violate an operation's contract (malformed selections, dangling pointers).
    #[error("contract violation: {0}")]
    Contract(String),

    /// A wall-clock or iteration budget ran out before completion.
    #[error("budget exhausted: {0}")]
    Budget(String),

    /// The optimization backend failed.
    #[error("solver error: {0}")]
    Solver(String),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("parse error: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, SseError>;
