use thiserror::Error;

#[derive(Debug, Error)]
pub enum LabError {
    #[error("config error at `{key}`: {message}")]
    Config { key: String, message: String },
    #[error(transparent)]
    Core(#[from] wavemap_core::Error),
    #[error("{0}")]
    Experiment(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl LabError {
    /// Process exit code: 3 for configuration problems, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config { .. } => 3,
            _ => 2,
        }
    }
}

pub type LabResult<T> = Result<T, LabError>;
