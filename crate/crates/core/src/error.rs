use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed or out-of-range input.
    #[error("invalid argument: {0}")]
    Argument(String),

    /// A denominator vanished, e.g. an intermediate level driven on resonance.
    #[error("singular configuration: {0}")]
    Singularity(String),

    /// Iterative method failed to converge or step size underflowed.
    #[error("numerical failure: {0}")]
    Numerical(String),

    /// An operation's precondition on its input state does not hold.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Population would leave the truncated phonon space.
    #[error("phonon truncation exceeded: {0}")]
    Truncation(String),

    #[error("atomic data: {0}")]
    Data(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }
}
