use thiserror::Error;

/// Errors from the numeric substrate.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite value {value} at index {index} in {context}")]
    NonFinite {
        context: &'static str,
        index: usize,
        value: f64,
    },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("checkpoint format error: {0}")]
    Format(String),

    #[error("linear algebra failure: {0}")]
    Linalg(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;

/// Returns a [`CoreError::NonFinite`] if any entry of `values` is NaN or infinite.
pub fn ensure_finite<S: crate::scalar::Scalar>(
    context: &'static str,
    values: &[S],
) -> Result<()> {
    for (index, &v) in values.iter().enumerate() {
        if !v.is_finite() {
            return Err(CoreError::NonFinite {
                context,
                index,
                value: v.to_f64_lossy(),
            });
        }
    }
    Ok(())
}
