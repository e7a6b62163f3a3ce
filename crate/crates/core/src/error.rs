use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// A non-finite coordinate appeared in an iterate.
    #[error("iterate diverged at epoch {epoch}, inner step {step}")]
    Divergence { epoch: usize, step: usize },

    #[error("reference solver hit its iteration cap ({iterations}) at gradient norm {achieved:e}")]
    ConvergenceFailure { iterations: usize, achieved: f64 },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
