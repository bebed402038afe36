use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("shape mismatch in {context}: {lhs} vs {rhs}")]
    ShapeMismatch {
        context: &'static str,
        lhs: usize,
        rhs: usize,
    },

    #[error("{0}")]
    InvalidInput(String),

    #[error("point count {n} exceeds the exact-assignment cap {cap}")]
    TooManyPoints { n: usize, cap: usize },

    #[error(transparent)]
    Core(#[from] seqflow_core::CoreError),
}

pub type Result<T> = std::result::Result<T, MetricsError>;
