//! Ground-truth simulators and datasets: the Lorenz attractor with rotated
//! noisy observations, the forced 1-D Burgers equation with partial
//! observation, a scalar linear chain, and the binary trajectory format.

pub mod burgers;
pub mod chain;
pub mod error;
pub mod lorenz;
pub mod noise;
pub mod trajectory;

pub use burgers::BurgersSystem;
pub use chain::LinearChain;
pub use error::{DynError, Result};
pub use lorenz::{LorenzSystem, LORENZ_DIM};
pub use noise::NoiseLevel;
pub use trajectory::{generate_dataset, SystemConfig, TrajectoryMeta, TrajectorySet};
