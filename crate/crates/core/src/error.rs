//! Crate-wide error type.

/// Errors surfaced by model construction, estimation and the numeric
/// machinery.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parameter index {index} out of range (space has {len} points)")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid prior: {0}")]
    InvalidPrior(String),

    #[error("observation outside the {family} support: {detail}")]
    DomainViolation { family: &'static str, detail: String },

    #[error("model lacks the {0} capability")]
    MissingCapability(&'static str),

    #[error("empty data")]
    EmptyData,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("optimizer did not converge: {0}")]
    NonConvergence(String),

    #[error("log-moment generating function diverged")]
    DivergentLmgf,

    #[error("no dominating point: {0}")]
    NoDominatingPoint(String),

    #[error("enumeration guard exceeded: {0}")]
    EnumerationGuard(String),

    #[error("unsupported operation: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
