use thiserror::Error;

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("invalid flow config: {0}")]
    Config(String),

    #[error("non-finite state during ODE integration at step {step}")]
    NonFiniteState { step: usize },

    #[error("training loss diverged at epoch {epoch}")]
    Divergence { epoch: usize },

    #[error(transparent)]
    Core(#[from] seqflow_core::CoreError),

    #[error(transparent)]
    Dynamics(#[from] seqflow_dynamics::DynError),
}

pub type Result<T> = std::result::Result<T, FlowError>;
