//! Source re-noising and the forward-Euler ODE sampler.

use rand::Rng;
use serde::{Deserialize, Serialize};

use seqflow_core::rng::normal_vec;
use seqflow_core::{Matrix, Scalar};

use crate::error::{FlowError, Result};
use crate::path::FlowPath;
use crate::velocity::VelocityField;
use crate::window::ConditionWindow;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    /// Velocity evaluations per sequential update.
    pub nfe: usize,
    /// Re-noise level applied to the carried-over prediction.
    pub tau_renoise: f64,
    /// Velocity evaluations for the initial Gaussian-source draw.
    pub nfe_init: usize,
    pub seed: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            nfe: 1,
            tau_renoise: 0.3,
            nfe_init: 50,
            seed: 0,
        }
    }
}

impl SamplerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nfe < 1 {
            return Err(FlowError::Config("sampler.nfe must be >= 1".into()));
        }
        if self.nfe_init < 1 {
            return Err(FlowError::Config("sampler.nfe_init must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.tau_renoise) {
            return Err(FlowError::Config(format!(
                "sampler.tau_renoise must be in [0, 1], got {}",
                self.tau_renoise
            )));
        }
        Ok(())
    }
}

/// `x̃ = α(τ_r)·x + σ(τ_r)·ε`, `ε ~ N(0, I)`.
pub fn renoise<S: Scalar>(
    x: &[S],
    tau_r: S,
    path: FlowPath,
    rng: &mut impl Rng,
) -> Result<Vec<S>> {
    let t = tau_r.to_f64_lossy();
    if !(0.0..=1.0).contains(&t) {
        return Err(FlowError::Config(format!(
            "renoise level must be in [0, 1], got {t}"
        )));
    }
    let a = path.alpha(tau_r);
    let s = path.sigma(tau_r);
    let eps: Vec<S> = normal_vec(rng, x.len());
    Ok(x.iter()
        .zip(eps)
        .map(|(&v, e)| a * v + s * e)
        .collect())
}

/// Batched [`renoise`] over matrix rows.
pub fn renoise_batch<S: Scalar>(
    xs: &Matrix<S>,
    tau_r: S,
    path: FlowPath,
    rng: &mut impl Rng,
) -> Result<Matrix<S>> {
    let t = tau_r.to_f64_lossy();
    if !(0.0..=1.0).contains(&t) {
        return Err(FlowError::Config(format!(
            "renoise level must be in [0, 1], got {t}"
        )));
    }
    let a = path.alpha(tau_r);
    let s = path.sigma(tau_r);
    let eps: Vec<S> = normal_vec(rng, xs.rows() * xs.cols());
    let mut out = xs.clone();
    for (o, e) in out.data_mut().iter_mut().zip(eps) {
        *o = a * *o + s * e;
    }
    Ok(out)
}

/// Forward-Euler integration of `dx/dτ = v(x, τ)` from τ=1 down to τ=0:
/// `x ← x − (1/nfe)·v(x, τ_k)` over `τ_k = 1, 1−1/nfe, …, 1/nfe`.
pub fn sample_ode<S: Scalar>(
    field: &impl VelocityField<S>,
    source: &[S],
    ctx: &ConditionWindow<S>,
    nfe: usize,
) -> Result<Vec<S>> {
    let sources = Matrix::from_rows(&[source.to_vec()]).map_err(FlowError::Core)?;
    let out = sample_ode_batch(field, &sources, &[ctx], nfe)?;
    Ok(out.row(0).to_vec())
}

/// Batched Euler sampler; all rows share the τ schedule, row `r` of
/// `sources` is conditioned on `ctxs[r]`.
pub fn sample_ode_batch<S: Scalar>(
    field: &impl VelocityField<S>,
    sources: &Matrix<S>,
    ctxs: &[&ConditionWindow<S>],
    nfe: usize,
) -> Result<Matrix<S>> {
    if nfe < 1 {
        return Err(FlowError::Config("nfe must be >= 1".into()));
    }
    let h = S::one() / S::from_f64_lossy(nfe as f64);
    let mut x = sources.clone();
    for k in 0..nfe {
        let tau = S::one() - S::from_f64_lossy(k as f64) * h;
        // clamp roundoff so τ stays in [0, 1]
        let tau = tau.min(S::one()).max(S::zero());
        let v = field.velocity_batch(&x, tau, ctxs)?;
        for (o, &dv) in x.data_mut().iter_mut().zip(v.data()) {
            *o = *o - h * dv;
        }
        if x.data().iter().any(|v| !v.is_finite()) {
            return Err(FlowError::NonFiniteState { step: k });
        }
    }
    Ok(x)
}
