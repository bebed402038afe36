//! Checkpoint file format.
//!
//! Layout: magic `SFMC`, one format-version byte, a 4-byte little-endian
//! header length, a JSON header (architecture, normalization statistics,
//! flow-path id, seed, task metadata), then the parameters as 32-bit
//! little-endian floats.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::nn::{MlpConfig, ParamVector};
use crate::scalar::Scalar;

pub const CHECKPOINT_MAGIC: [u8; 4] = *b"SFMC";
pub const CHECKPOINT_VERSION: u8 = 1;

/// Per-dimension z-scoring statistics for targets and observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub target_mean: Vec<f64>,
    pub target_std: Vec<f64>,
    pub obs_mean: Vec<f64>,
    pub obs_std: Vec<f64>,
}

impl NormStats {
    /// Pass-through stats (mean 0, std 1).
    pub fn identity(target_dim: usize, obs_dim: usize) -> Self {
        Self {
            target_mean: vec![0.0; target_dim],
            target_std: vec![1.0; target_dim],
            obs_mean: vec![0.0; obs_dim],
            obs_std: vec![1.0; obs_dim],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub config: MlpConfig,
    pub norm: NormStats,
    pub flow_path: String,
    pub seed: u64,
    pub task: String,
    /// Dimension of the predicted variable (flattened horizon for forecasting).
    pub target_dim: usize,
    /// Observation window length consumed as conditioning.
    pub window_len: usize,
    pub obs_dim: usize,
    pub horizon: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub header: CheckpointHeader,
    pub params: Vec<f32>,
}

impl Checkpoint {
    pub fn new(header: CheckpointHeader, params: Vec<f32>) -> Result<Self> {
        if params.len() != header.config.param_count() {
            return Err(CoreError::DimensionMismatch {
                context: "Checkpoint::new params",
                expected: header.config.param_count(),
                actual: params.len(),
            });
        }
        Ok(Self { header, params })
    }

    pub fn params_as<S: Scalar>(&self) -> ParamVector<S> {
        ParamVector::from_raw(self.params.iter().map(|&v| S::from_f64_lossy(v as f64)).collect())
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        let header = serde_json::to_vec(&self.header)
            .map_err(|e| CoreError::Format(format!("header encode: {e}")))?;
        let len = u32::try_from(header.len())
            .map_err(|_| CoreError::Format("header too large".into()))?;
        w.write_all(&CHECKPOINT_MAGIC)?;
        w.write_all(&[CHECKPOINT_VERSION])?;
        w.write_all(&len.to_le_bytes())?;
        w.write_all(&header)?;
        for &p in &self.params {
            w.write_all(&p.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if magic != CHECKPOINT_MAGIC {
            return Err(CoreError::Format(format!(
                "bad magic {magic:?}, expected {CHECKPOINT_MAGIC:?}"
            )));
        }
        let mut version = [0u8; 1];
        r.read_exact(&mut version)?;
        if version[0] != CHECKPOINT_VERSION {
            return Err(CoreError::Format(format!(
                "unsupported checkpoint version {}",
                version[0]
            )));
        }
        let mut len = [0u8; 4];
        r.read_exact(&mut len)?;
        let len = u32::from_le_bytes(len) as usize;
        let mut header = vec![0u8; len];
        r.read_exact(&mut header)?;
        let header: CheckpointHeader = serde_json::from_slice(&header)
            .map_err(|e| CoreError::Format(format!("header decode: {e}")))?;

        let expected = header.config.param_count();
        let mut raw = Vec::new();
        r.read_to_end(&mut raw)?;
        if raw.len() != expected * 4 {
            return Err(CoreError::Format(format!(
                "parameter payload: expected {} bytes, got {}",
                expected * 4,
                raw.len()
            )));
        }
        let params: Vec<f32> = raw
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]))
            .collect();
        if let Some(i) = params.iter().position(|p| !p.is_finite()) {
            return Err(CoreError::NonFinite {
                context: "checkpoint params",
                index: i,
                value: params[i] as f64,
            });
        }
        Ok(Self { header, params })
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Activation;

    fn sample() -> Checkpoint {
        let config = MlpConfig::new(3, vec![4], 2, Activation::Tanh, 2).unwrap();
        let n = config.param_count();
        let header = CheckpointHeader {
            config,
            norm: NormStats::identity(2, 1),
            flow_path: "straight".into(),
            seed: 11,
            task: "toy".into(),
            target_dim: 2,
            window_len: 4,
            obs_dim: 1,
            horizon: 1,
        };
        Checkpoint::new(header, (0..n).map(|i| i as f32 * 0.5 - 3.0).collect()).unwrap()
    }

    #[test]
    fn round_trip() {
        let ckpt = sample();
        let mut buf = Vec::new();
        ckpt.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"SFMC");
        assert_eq!(buf[4], CHECKPOINT_VERSION);
        let back = Checkpoint::read_from(buf.as_slice()).unwrap();
        assert_eq!(back, ckpt);
    }

    #[test]
    fn rejects_bad_magic() {
        let ckpt = sample();
        let mut buf = Vec::new();
        ckpt.write_to(&mut buf).unwrap();
        buf[0] = b'X';
        assert!(Checkpoint::read_from(buf.as_slice()).is_err());
    }

    #[test]
    fn rejects_truncated_params() {
        let ckpt = sample();
        let mut buf = Vec::new();
        ckpt.write_to(&mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(Checkpoint::read_from(buf.as_slice()).is_err());
    }
}
