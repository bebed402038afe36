//! Measurement-uncertainty level expressed in decibels: `db = 10·log10(1/r²)`.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseLevel {
    pub db: f64,
}

impl NoiseLevel {
    pub fn from_db(db: f64) -> Self {
        Self { db }
    }

    pub fn from_r(r: f64) -> Self {
        Self {
            db: 10.0 * (1.0 / (r * r)).log10(),
        }
    }

    /// Observation-noise standard deviation `r = 10^(−db/20)`.
    pub fn r(&self) -> f64 {
        10f64.powf(-self.db / 20.0)
    }
}
