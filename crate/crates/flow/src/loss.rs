//! The velocity-matching objective and its exact gradient.
//!
//! A training step draws one interpolation time per batch element, re-noises
//! explicit sources (or draws fresh Gaussian sources during pretraining),
//! interpolates, and regresses the network output onto the interpolant
//! velocity. The loss is the squared error averaged over batch and output
//! dimensions.

use rand::Rng;

use seqflow_core::nn::{time_embed, ForwardBackward};
use seqflow_core::rng::{normal_vec, uniform01};
use seqflow_core::{CoreError, Matrix, MlpConfig, ParamVector, Scalar};

use crate::dataset::{FinetunePair, TrainItem};
use crate::error::{FlowError, Result};
use crate::path::{interpolate, FlowPath};
use crate::velocity::VelocityField;
use crate::window::ConditionWindow;

/// A batch with everything stochastic already drawn: assembled network
/// inputs and the matching target velocities.
#[derive(Debug, Clone)]
pub struct PreparedBatch<S> {
    pub inputs: Matrix<S>,
    pub target_vel: Matrix<S>,
}

impl<S: Scalar> PreparedBatch<S> {
    /// Build one row from its pieces (used directly by oracle tests).
    pub fn from_parts(rows: Vec<(Vec<S>, S, ConditionWindow<S>, Vec<S>)>, cfg: &MlpConfig) -> Result<Self> {
        let mut inputs = Vec::with_capacity(rows.len());
        let mut targets = Vec::with_capacity(rows.len());
        for (x_tau, tau, ctx, vel) in rows {
            let mut row = x_tau;
            row.extend(time_embed::<S>(tau, cfg.time_embed_dim).map_err(FlowError::Core)?);
            row.extend_from_slice(ctx.data());
            if row.len() != cfg.input_dim {
                return Err(FlowError::Core(CoreError::DimensionMismatch {
                    context: "PreparedBatch row",
                    expected: cfg.input_dim,
                    actual: row.len(),
                }));
            }
            inputs.push(row);
            targets.push(vel);
        }
        Ok(Self {
            inputs: Matrix::from_rows(&inputs).map_err(FlowError::Core)?,
            target_vel: Matrix::from_rows(&targets).map_err(FlowError::Core)?,
        })
    }
}

fn prepare_rows(
    cfg: &MlpConfig,
    path: FlowPath,
    targets: &[&[f32]],
    sources: &[Vec<f32>],
    ctxs: &[&ConditionWindow<f32>],
    rng: &mut impl Rng,
) -> Result<PreparedBatch<f32>> {
    let mut rows = Vec::with_capacity(targets.len());
    for i in 0..targets.len() {
        let tau: f32 = uniform01(rng);
        let (x_tau, dx_tau) = interpolate(path, targets[i], &sources[i], tau)?;
        rows.push((x_tau, tau, ctxs[i].clone(), dx_tau));
    }
    PreparedBatch::from_parts(rows, cfg)
}

/// Pretraining batch: fresh standard-normal sources.
pub fn prepare_pretrain_batch(
    cfg: &MlpConfig,
    path: FlowPath,
    items: &[&TrainItem],
    rng: &mut impl Rng,
) -> Result<PreparedBatch<f32>> {
    if items.is_empty() {
        return Err(FlowError::Config("empty batch".into()));
    }
    let sources: Vec<Vec<f32>> = items
        .iter()
        .map(|it| normal_vec(rng, it.target.len()))
        .collect();
    let targets: Vec<&[f32]> = items.iter().map(|it| it.target.as_slice()).collect();
    let ctxs: Vec<&ConditionWindow<f32>> = items.iter().map(|it| &it.ctx).collect();
    prepare_rows(cfg, path, &targets, &sources, &ctxs, rng)
}

/// Finetuning batch: carried-over sources re-noised at `tau_renoise`, fresh
/// noise on every visit.
pub fn prepare_finetune_batch(
    cfg: &MlpConfig,
    path: FlowPath,
    pairs: &[&FinetunePair],
    tau_renoise: f32,
    rng: &mut impl Rng,
) -> Result<PreparedBatch<f32>> {
    if pairs.is_empty() {
        return Err(FlowError::Config("empty batch".into()));
    }
    let sources: Vec<Vec<f32>> = pairs
        .iter()
        .map(|p| crate::sampler::renoise(&p.source, tau_renoise, path, rng))
        .collect::<Result<_>>()?;
    let targets: Vec<&[f32]> = pairs.iter().map(|p| p.target.as_slice()).collect();
    let ctxs: Vec<&ConditionWindow<f32>> = pairs.iter().map(|p| &p.ctx).collect();
    prepare_rows(cfg, path, &targets, &sources, &ctxs, rng)
}

/// Loss and exact parameter gradient on a prepared batch:
/// `L = Σ ‖v_θ − ẋ‖² / (batch · dim)`.
pub fn fm_loss_and_grad<S: Scalar>(
    params: &ParamVector<S>,
    cfg: &MlpConfig,
    batch: &PreparedBatch<S>,
) -> Result<(S, ParamVector<S>)> {
    let n = batch.inputs.rows();
    if n == 0 {
        return Err(FlowError::Config("empty batch".into()));
    }
    let fb = ForwardBackward::run(params, cfg, &batch.inputs).map_err(FlowError::Core)?;
    let out = fb.output();
    let denom = S::from_f64_lossy((n * cfg.output_dim) as f64);

    let mut loss = S::zero();
    let mut upstream = Matrix::<S>::zeros(n, cfg.output_dim);
    let two = S::from_f64_lossy(2.0);
    for idx in 0..out.data().len() {
        let r = out.data()[idx] - batch.target_vel.data()[idx];
        loss += r * r;
        upstream.data_mut()[idx] = two * r / denom;
    }
    loss = loss / denom;
    if !loss.is_finite() {
        return Err(FlowError::Core(CoreError::NonFinite {
            context: "fm loss",
            index: 0,
            value: loss.to_f64_lossy(),
        }));
    }
    let grads = fb.backward(cfg, &upstream).map_err(FlowError::Core)?;
    Ok((loss, grads))
}

/// Spec-level convenience: draw interpolation times from `rng` and return
/// loss and gradient over a pair batch.
pub fn fm_loss_and_grad_pairs(
    params: &ParamVector<f32>,
    cfg: &MlpConfig,
    pairs: &[&FinetunePair],
    path: FlowPath,
    tau_renoise: f32,
    rng: &mut impl Rng,
) -> Result<(f32, ParamVector<f32>)> {
    let batch = prepare_finetune_batch(cfg, path, pairs, tau_renoise, rng)?;
    fm_loss_and_grad(params, cfg, &batch)
}

/// Evaluate the objective for an arbitrary velocity field (oracle injection):
/// rows are `(x_tau, tau, ctx, target velocity)`.
pub fn fm_loss_with_field<S: Scalar>(
    field: &impl VelocityField<S>,
    rows: &[(Vec<S>, S, ConditionWindow<S>, Vec<S>)],
) -> Result<f64> {
    if rows.is_empty() {
        return Err(FlowError::Config("empty batch".into()));
    }
    let mut total = 0.0f64;
    let mut count = 0usize;
    for (x_tau, tau, ctx, vel) in rows {
        let v = field.velocity(x_tau, *tau, ctx)?;
        for (a, b) in v.iter().zip(vel) {
            let d = a.to_f64_lossy() - b.to_f64_lossy();
            total += d * d;
        }
        count += vel.len();
    }
    Ok(total / count as f64)
}
