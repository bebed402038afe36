use thiserror::Error;

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Core(#[from] seqflow_core::CoreError),

    #[error(transparent)]
    Metrics(#[from] seqflow_metrics::MetricsError),
}

pub type Result<T> = std::result::Result<T, TheoryError>;
