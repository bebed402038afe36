//! Viscous 1-D Burgers equation on [0, 1] with Dirichlet zero boundaries:
//! `∂u/∂t = −u·∂u/∂x + ν·∂²u/∂x² + a(x,t)`, advanced by an explicit
//! finite-difference scheme (upwind convection, central diffusion).
//!
//! Uncertainty enters through partial observation (only the left half of the
//! grid is visible) and through the random forcing, which is excluded from
//! the observations.

use rand::Rng;
use seqflow_core::rng::normal;

use crate::error::{DynError, Result};

#[derive(Debug, Clone)]
pub struct BurgersSystem {
    pub nu: f64,
    /// Grid points including both boundaries.
    pub grid: usize,
    /// Internal solver steps per observation frame.
    pub substeps: usize,
    /// Fraction of the diffusive stability bound used as the solver timestep.
    pub cfl_fraction: f64,
    /// Random sine modes in the forcing field, refreshed per frame.
    pub forcing_modes: usize,
    pub forcing_amp: f64,
    /// Random sine modes in the initial condition.
    pub init_modes: usize,
    pub init_amp: f64,
}

impl Default for BurgersSystem {
    fn default() -> Self {
        Self {
            nu: 0.01,
            grid: 64,
            substeps: 4,
            cfl_fraction: 0.4,
            forcing_modes: 2,
            forcing_amp: 0.1,
            init_modes: 3,
            init_amp: 0.5,
        }
    }
}

impl BurgersSystem {
    pub fn validate(&self) -> Result<()> {
        if self.grid < 4 {
            return Err(DynError::InvalidConfig("grid must be >= 4".into()));
        }
        if self.nu <= 0.0 {
            return Err(DynError::InvalidConfig("nu must be > 0".into()));
        }
        if !(0.0 < self.cfl_fraction && self.cfl_fraction <= 0.4) {
            return Err(DynError::InvalidConfig(
                "cfl_fraction must be in (0, 0.4]".into(),
            ));
        }
        if self.substeps == 0 {
            return Err(DynError::InvalidConfig("substeps must be >= 1".into()));
        }
        Ok(())
    }

    pub fn dx(&self) -> f64 {
        1.0 / (self.grid - 1) as f64
    }

    /// Solver timestep, bounded by `cfl_fraction · dx²/ν ≤ 0.4·dx²/ν`.
    pub fn dt(&self) -> f64 {
        self.cfl_fraction * self.dx() * self.dx() / self.nu
    }

    pub fn obs_dim(&self) -> usize {
        self.grid / 2
    }

    /// Random smooth initial profile, zero on the boundary.
    pub fn initial_state(&self, rng: &mut impl Rng) -> Vec<f64> {
        let coeffs: Vec<f64> = (1..=self.init_modes)
            .map(|k| self.init_amp * normal::<f64>(rng) / k as f64)
            .collect();
        (0..self.grid)
            .map(|i| {
                let x = i as f64 * self.dx();
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * ((k + 1) as f64 * std::f64::consts::PI * x).sin())
                    .sum()
            })
            .collect()
    }

    /// Random forcing field for one frame: a sum of low sine modes with
    /// amplitudes ~ N(0, forcing_amp²).
    pub fn sample_forcing(&self, rng: &mut impl Rng) -> Vec<f64> {
        let coeffs: Vec<f64> = (1..=self.forcing_modes)
            .map(|_| self.forcing_amp * normal::<f64>(rng))
            .collect();
        (0..self.grid)
            .map(|i| {
                let x = i as f64 * self.dx();
                coeffs
                    .iter()
                    .enumerate()
                    .map(|(k, c)| c * ((k + 1) as f64 * std::f64::consts::PI * x).sin())
                    .sum()
            })
            .collect()
    }

    fn step_once(&self, u: &[f64], a: &[f64], dt: f64) -> Vec<f64> {
        let n = self.grid;
        let dx = self.dx();
        let mut next = vec![0.0; n];
        for i in 1..n - 1 {
            let ui = u[i];
            let conv = if ui > 0.0 {
                ui * (ui - u[i - 1]) / dx
            } else {
                ui * (u[i + 1] - ui) / dx
            };
            let diff = self.nu * (u[i + 1] - 2.0 * ui + u[i - 1]) / (dx * dx);
            next[i] = ui + dt * (-conv + diff + a[i]);
        }
        // Dirichlet boundaries stay pinned at zero
        next[0] = 0.0;
        next[n - 1] = 0.0;
        next
    }

    /// Advance one observation frame (`substeps` solver steps with the
    /// forcing held fixed).
    pub fn step_frame(&self, u: &[f64], a: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.grid || a.len() != self.grid {
            return Err(DynError::InvalidConfig(format!(
                "state/forcing length {} / {} != grid {}",
                u.len(),
                a.len(),
                self.grid
            )));
        }
        let dt = self.dt();
        let mut cur = u.to_vec();
        for step in 0..self.substeps {
            cur = self.step_once(&cur, a, dt);
            let max = cur.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            if max > 1e3 {
                return Err(DynError::Unstable { step, max });
            }
        }
        Ok(cur)
    }

    /// Partial observation: the left half of the field. The forcing is never
    /// observed.
    pub fn observe(&self, u: &[f64]) -> Vec<f64> {
        u[..self.obs_dim()].to_vec()
    }
}
