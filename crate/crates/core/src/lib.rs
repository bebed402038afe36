//! Numeric substrate for the sequential flow matching workspace: dense
//! matrices, a small MLP with exact reverse-mode gradients, an adaptive
//! optimizer, seedable RNG substreams, finite-difference oracles, and the
//! checkpoint file format.
//!
//! Everything numeric is generic over [`Scalar`] (f32 or f64); concrete
//! aliases live at the crate root. Verification and oracle paths run in f64;
//! training loops may run in f32.

pub mod checkpoint;
pub mod error;
pub mod linalg;
pub mod matrix;
pub mod nn;
pub mod numdiff;
pub mod optim;
pub mod rng;
pub mod scalar;

pub use checkpoint::{Checkpoint, CheckpointHeader, NormStats};
pub use error::{CoreError, Result};
pub use matrix::Matrix;
pub use nn::{Activation, MlpConfig, ParamVector};
pub use optim::OptimizerState;
pub use scalar::Scalar;

pub type Matrix32 = Matrix<f32>;
pub type Matrix64 = Matrix<f64>;
pub type Params32 = ParamVector<f32>;
pub type Params64 = ParamVector<f64>;
pub type Optimizer32 = OptimizerState<f32>;
pub type Optimizer64 = OptimizerState<f64>;
