use thiserror::Error;

#[derive(Debug, Error)]
pub enum DynError {
    #[error("numerical instability at step {step}: max |u| = {max:.3e}")]
    Unstable { step: usize, max: f64 },

    #[error("invalid system config: {0}")]
    InvalidConfig(String),

    #[error("trajectory file format error: {0}")]
    Format(String),

    #[error("index out of range: {0}")]
    OutOfRange(String),

    #[error(transparent)]
    Core(#[from] seqflow_core::CoreError),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, DynError>;
