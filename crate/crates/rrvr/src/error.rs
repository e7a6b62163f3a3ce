use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] rrvr_core::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error("trace file: {0}")]
    Trace(String),
    #[error("{0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Process exit status: 2 for a diverged run, 1 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Core(rrvr_core::Error::Divergence { .. }) => 2,
            _ => 1,
        }
    }
}
