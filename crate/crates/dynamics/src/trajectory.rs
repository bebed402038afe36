//! Trajectory sets and their binary file format.
//!
//! Layout: magic `SFMD`, one version byte, 4-byte little-endian header
//! length, a JSON header (system config, seed, shapes, observation rotation),
//! then states followed by observations as 32-bit little-endian floats,
//! trajectory-major, then time-major, then dimension.
//!
//! Values are stored — and kept in memory — at f32 precision so that a
//! generated set and its reloaded file are bit-identical.

use std::io::{Read, Write};
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::burgers::BurgersSystem;
use crate::chain::LinearChain;
use crate::error::{DynError, Result};
use crate::lorenz::{LorenzSystem, LORENZ_DIM};
use crate::noise::NoiseLevel;

pub const TRAJECTORY_MAGIC: [u8; 4] = *b"SFMD";
pub const TRAJECTORY_VERSION: u8 = 1;

/// Generator configuration, echoed into the file header.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "system", rename_all = "snake_case")]
pub enum SystemConfig {
    Lorenz {
        delta: f64,
        noise_db: f64,
        burn_in: usize,
    },
    Burgers {
        nu: f64,
        grid: usize,
        substeps: usize,
        cfl_fraction: f64,
        forcing_modes: usize,
        forcing_amp: f64,
        init_modes: usize,
        init_amp: f64,
    },
    Chain {
        coeff: f64,
        q: f64,
        r: f64,
    },
}

impl SystemConfig {
    pub fn lorenz(noise_db: f64) -> Self {
        Self::Lorenz {
            delta: LorenzSystem::DEFAULT_DELTA,
            noise_db,
            burn_in: 100,
        }
    }

    pub fn burgers() -> Self {
        let b = BurgersSystem::default();
        Self::Burgers {
            nu: b.nu,
            grid: b.grid,
            substeps: b.substeps,
            cfl_fraction: b.cfl_fraction,
            forcing_modes: b.forcing_modes,
            forcing_amp: b.forcing_amp,
            init_modes: b.init_modes,
            init_amp: b.init_amp,
        }
    }

    pub fn chain(coeff: f64, q: f64, r: f64) -> Self {
        Self::Chain { coeff, q, r }
    }

    pub fn state_dim(&self) -> usize {
        match self {
            Self::Lorenz { .. } => LORENZ_DIM,
            Self::Burgers { grid, .. } => *grid,
            Self::Chain { .. } => 1,
        }
    }

    pub fn obs_dim(&self) -> usize {
        match self {
            Self::Lorenz { .. } => LORENZ_DIM,
            Self::Burgers { grid, .. } => grid / 2,
            Self::Chain { .. } => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryMeta {
    pub config: SystemConfig,
    pub seed: u64,
    pub n_traj: usize,
    pub t_len: usize,
    pub state_dim: usize,
    pub obs_dim: usize,
    /// Row-major observation rotation for Lorenz data.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rotation: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySet {
    pub meta: TrajectoryMeta,
    states: Vec<f32>,
    observations: Vec<f32>,
}

impl TrajectorySet {
    pub fn n_traj(&self) -> usize {
        self.meta.n_traj
    }

    pub fn t_len(&self) -> usize {
        self.meta.t_len
    }

    pub fn state_dim(&self) -> usize {
        self.meta.state_dim
    }

    pub fn obs_dim(&self) -> usize {
        self.meta.obs_dim
    }

    pub fn state(&self, traj: usize, t: usize) -> &[f32] {
        let d = self.meta.state_dim;
        let off = (traj * self.meta.t_len + t) * d;
        &self.states[off..off + d]
    }

    pub fn observation(&self, traj: usize, t: usize) -> &[f32] {
        let d = self.meta.obs_dim;
        let off = (traj * self.meta.t_len + t) * d;
        &self.observations[off..off + d]
    }

    /// All observations of one trajectory, time-major.
    pub fn observations_of(&self, traj: usize) -> &[f32] {
        let stride = self.meta.t_len * self.meta.obs_dim;
        &self.observations[traj * stride..(traj + 1) * stride]
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let header = serde_json::to_vec(&self.meta)
            .map_err(|e| DynError::Format(format!("header encode: {e}")))?;
        let len = u32::try_from(header.len())
            .map_err(|_| DynError::Format("header too large".into()))?;
        w.write_all(&TRAJECTORY_MAGIC)?;
        w.write_all(&[TRAJECTORY_VERSION])?;
        w.write_all(&len.to_le_bytes())?;
        w.write_all(&header)?;
        for &v in &self.states {
            w.write_all(&v.to_le_bytes())?;
        }
        for &v in &self.observations {
            w.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != TRAJECTORY_MAGIC {
            return Err(DynError::Format(format!(
                "bad magic {magic:?}, expected {TRAJECTORY_MAGIC:?}"
            )));
        }
        let mut version = [0u8; 1];
        r.read_exact(&mut version)?;
        if version[0] != TRAJECTORY_VERSION {
            return Err(DynError::Format(format!(
                "unsupported trajectory version {}",
                version[0]
            )));
        }
        let mut len = [0u8; 4];
        r.read_exact(&mut len)?;
        let len = u32::from_le_bytes(len) as usize;
        let mut header = vec![0u8; len];
        r.read_exact(&mut header)?;
        let meta: TrajectoryMeta = serde_json::from_slice(&header)
            .map_err(|e| DynError::Format(format!("header decode: {e}")))?;

        let n_states = meta.n_traj * meta.t_len * meta.state_dim;
        let n_obs = meta.n_traj * meta.t_len * meta.obs_dim;
        let mut raw = Vec::new();
        r.read_to_end(&mut raw)?;
        if raw.len() != (n_states + n_obs) * 4 {
            return Err(DynError::Format(format!(
                "payload: expected {} bytes, got {}",
                (n_states + n_obs) * 4,
                raw.len()
            )));
        }
        let floats: Vec<f32> = raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        Ok(Self {
            meta,
            states: floats[..n_states].to_vec(),
            observations: floats[n_states..].to_vec(),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let data = std::fs::read(path)?;
        Self::read_from(data.as_slice())
    }
}

/// Simulate one trajectory; returns (states, observations) time-major.
fn simulate_one(
    config: &SystemConfig,
    t_len: usize,
    rng: &mut impl Rng,
) -> Result<(Vec<f32>, Vec<f32>)> {
    let state_dim = config.state_dim();
    let obs_dim = config.obs_dim();
    let mut states = Vec::with_capacity(t_len * state_dim);
    let mut obs = Vec::with_capacity(t_len * obs_dim);

    match config {
        SystemConfig::Lorenz {
            delta,
            noise_db,
            burn_in,
        } => {
            let sys = LorenzSystem::new(*delta, NoiseLevel::from_db(*noise_db))?;
            let mut s = sys.initial_state(rng, *burn_in);
            for _ in 0..t_len {
                s = sys.step(&s, rng);
                let z = sys.observe(&s, rng);
                states.extend(s.iter().map(|&v| v as f32));
                obs.extend(z.iter().map(|&v| v as f32));
            }
        }
        SystemConfig::Burgers {
            nu,
            grid,
            substeps,
            cfl_fraction,
            forcing_modes,
            forcing_amp,
            init_modes,
            init_amp,
        } => {
            let sys = BurgersSystem {
                nu: *nu,
                grid: *grid,
                substeps: *substeps,
                cfl_fraction: *cfl_fraction,
                forcing_modes: *forcing_modes,
                forcing_amp: *forcing_amp,
                init_modes: *init_modes,
                init_amp: *init_amp,
            };
            sys.validate()?;
            let mut u = sys.initial_state(rng);
            for _ in 0..t_len {
                let a = sys.sample_forcing(rng);
                u = sys.step_frame(&u, &a)?;
                let z = sys.observe(&u);
                states.extend(u.iter().map(|&v| v as f32));
                obs.extend(z.iter().map(|&v| v as f32));
            }
        }
        SystemConfig::Chain { coeff, q, r } => {
            let chain = LinearChain {
                coeff: *coeff,
                q: *q,
                r: *r,
            };
            let mut x = chain.initial_state(rng);
            for _ in 0..t_len {
                x = chain.step(x, rng);
                let z = chain.observe(x, rng);
                states.push(x as f32);
                obs.push(z as f32);
            }
        }
    }
    Ok((states, obs))
}

/// Deterministic dataset generation: trajectory `i` draws from the substream
/// `(seed, "traj", i)`, so the result is independent of scheduling order.
pub fn generate_dataset(
    config: &SystemConfig,
    n_traj: usize,
    t_len: usize,
    seed: u64,
) -> Result<TrajectorySet> {
    if n_traj == 0 || t_len == 0 {
        return Err(DynError::InvalidConfig(
            "n_traj and t_len must be >= 1".into(),
        ));
    }
    let per_traj: Vec<Result<(Vec<f32>, Vec<f32>)>> = (0..n_traj)
        .into_par_iter()
        .map(|i| {
            let mut rng = seqflow_core::rng::substream(seed, "traj", i as u64);
            simulate_one(config, t_len, &mut rng)
        })
        .collect();

    let state_dim = config.state_dim();
    let obs_dim = config.obs_dim();
    let mut states = Vec::with_capacity(n_traj * t_len * state_dim);
    let mut observations = Vec::with_capacity(n_traj * t_len * obs_dim);
    for r in per_traj {
        let (s, o) = r?;
        states.extend(s);
        observations.extend(o);
    }

    let rotation = match config {
        SystemConfig::Lorenz { .. } => Some(crate::lorenz::default_rotation().data().to_vec()),
        _ => None,
    };

    Ok(TrajectorySet {
        meta: TrajectoryMeta {
            config: config.clone(),
            seed,
            n_traj,
            t_len,
            state_dim,
            obs_dim,
            rotation,
        },
        states,
        observations,
    })
}
