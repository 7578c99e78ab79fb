use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// An enclosure could not be separated from a comparison threshold
    /// within the configured bit budget.
    #[error("precision exhausted after {bits} bits while deciding {context}")]
    PrecisionExhausted { context: String, bits: u32 },
    #[error("parse error: {0}")]
    Parse(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
