use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violates a documented precondition.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// The requested computation is not defined for this problem class.
    #[error("unsupported problem: {0}")]
    Unsupported(String),
    /// Malformed configuration file, flag combination, or missing section.
    #[error("config error: {0}")]
    Config(String),
    /// A block oracle produced a non-finite value during a run.
    #[error("non-finite {what} at iteration {iteration}")]
    NonFinite { what: &'static str, iteration: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
