use thiserror::Error;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("assumption violated: {0}")]
    Assumption(String),
    #[error(transparent)]
    Core(#[from] specshift_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}
