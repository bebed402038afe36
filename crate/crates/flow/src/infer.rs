//! Streaming inference: the first prediction flows from a Gaussian source
//! under the pretrained model; every later round re-noises the carried-over
//! prediction (aligned by shift-and-pad for multi-step horizons) and flows it
//! to the new belief under the chosen network.

use rand::Rng;
use serde::{Deserialize, Serialize};

use seqflow_core::rng::{normal_vec, substream};
use seqflow_core::{Checkpoint, Matrix};
use seqflow_dynamics::TrajectorySet;

use crate::dataset::{shift_and_pad, FlowTask, Normalizer};
use crate::error::{FlowError, Result};
use crate::path::FlowPath;
use crate::sampler::{renoise_batch, sample_ode_batch, SamplerConfig};
use crate::velocity::{CountingField, MlpVelocity};
use crate::window::ConditionWindow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InferMethod {
    /// Fresh Gaussian source every round, pretrained network.
    Restart,
    /// Re-noised previous prediction, pretrained network (no finetuning).
    WarmStart,
    /// Re-noised previous prediction, finetuned sequential network.
    Sequential,
}

impl InferMethod {
    pub fn id(&self) -> &'static str {
        match self {
            InferMethod::Restart => "restart",
            InferMethod::WarmStart => "warmstart",
            InferMethod::Sequential => "sequential",
        }
    }
}

#[derive(Debug, Clone)]
pub struct InferenceOutput {
    /// Raw-space prediction per round.
    pub predictions: Vec<Vec<f32>>,
    /// Velocity-network evaluations actually performed.
    pub nfe_used: u64,
}

/// Single-stream inference over one observation sequence (flat, time-major).
pub fn sequential_infer(
    pretrained: &Checkpoint,
    seqnet: &Checkpoint,
    method: InferMethod,
    observations: &[f32],
    t_len: usize,
    task: &FlowTask,
    sampler: &SamplerConfig,
) -> Result<InferenceOutput> {
    sampler.validate()?;
    let obs_dim = pretrained.header.obs_dim;
    if observations.len() != t_len * obs_dim {
        return Err(FlowError::Core(seqflow_core::CoreError::DimensionMismatch {
            context: "sequential_infer observations",
            expected: t_len * obs_dim,
            actual: observations.len(),
        }));
    }
    let out = batch_infer_inner(
        pretrained,
        seqnet,
        method,
        &[observations],
        t_len,
        task,
        sampler,
        1,
    )?;
    let predictions = out
        .per_round
        .iter()
        .map(|m| m.row(0).to_vec())
        .collect();
    Ok(InferenceOutput {
        predictions,
        nfe_used: out.nfe_used,
    })
}

#[derive(Debug, Clone)]
pub struct BatchInference {
    /// Round-indexed predictions, one row per (trajectory, chain), raw space.
    pub per_round: Vec<Matrix<f32>>,
    pub nfe_used: u64,
    pub chains: usize,
    pub n_traj: usize,
}

impl BatchInference {
    pub fn row(&self, round: usize, traj: usize, chain: usize) -> &[f32] {
        self.per_round[round].row(traj * self.chains + chain)
    }
}

/// Evaluation-scale inference: every trajectory of the test set times
/// `chains` independent prediction streams, batched through the network.
pub fn batch_sequential_infer(
    pretrained: &Checkpoint,
    seqnet: &Checkpoint,
    method: InferMethod,
    test: &TrajectorySet,
    task: &FlowTask,
    sampler: &SamplerConfig,
    chains: usize,
) -> Result<BatchInference> {
    sampler.validate()?;
    if chains == 0 {
        return Err(FlowError::Config("chains must be >= 1".into()));
    }
    let obs: Vec<&[f32]> = (0..test.n_traj())
        .map(|i| test.observations_of(i))
        .collect();
    batch_infer_inner(
        pretrained,
        seqnet,
        method,
        &obs,
        test.t_len(),
        task,
        sampler,
        chains,
    )
}

#[allow(clippy::too_many_arguments)]
fn batch_infer_inner(
    pretrained: &Checkpoint,
    seqnet: &Checkpoint,
    method: InferMethod,
    observations: &[&[f32]],
    t_len: usize,
    task: &FlowTask,
    sampler: &SamplerConfig,
    chains: usize,
) -> Result<BatchInference> {
    if pretrained.header.target_dim != seqnet.header.target_dim
        || pretrained.header.obs_dim != seqnet.header.obs_dim
        || pretrained.header.window_len != seqnet.header.window_len
    {
        return Err(FlowError::Config(
            "pretrained and sequential checkpoints disagree on shapes".into(),
        ));
    }
    let norm = Normalizer::from_stats(&pretrained.header.norm);
    let path = FlowPath::from_id(&pretrained.header.flow_path)?;
    let obs_dim = pretrained.header.obs_dim;
    let window_len = pretrained.header.window_len;
    let target_dim = pretrained.header.target_dim;
    let state_dim = norm.state_mean.len();
    let horizon = task.horizon();
    let rounds = task.rounds(t_len);
    if rounds == 0 {
        return Err(FlowError::Config(format!(
            "trajectory length {t_len} yields no prediction rounds for horizon {horizon}"
        )));
    }
    let n_traj = observations.len();
    let rows = n_traj * chains;

    let pre_field = MlpVelocity::<f32>::from_checkpoint(pretrained)?;
    let seq_field = MlpVelocity::<f32>::from_checkpoint(seqnet)?;
    let pre_counter = CountingField::new(&pre_field);
    let seq_counter = CountingField::new(&seq_field);

    // per-trajectory normalized observation streams and per-round windows
    let obs_norm: Vec<Vec<f32>> = observations
        .iter()
        .map(|o| norm.normalize_obs_series(o))
        .collect();
    let window_at = |t: usize| -> Vec<ConditionWindow<f32>> {
        obs_norm
            .iter()
            .map(|o| ConditionWindow::from_flat(o, obs_dim, t, window_len))
            .collect()
    };

    let mut rng = substream(sampler.seed, "infer", 0);
    let mut per_round = Vec::with_capacity(rounds);

    // round 0: flow from a Gaussian source under the pretrained model
    let eps_rows: Vec<Vec<f32>> = (0..rows).map(|_| normal_vec(&mut rng, target_dim)).collect();
    let eps = Matrix::from_rows(&eps_rows).map_err(FlowError::Core)?;
    let windows0 = window_at(0);
    let ctx_refs: Vec<&ConditionWindow<f32>> = (0..rows)
        .map(|r| &windows0[r / chains])
        .collect();
    let mut state = sample_ode_batch(&pre_counter, &eps, &ctx_refs, sampler.nfe_init)?;
    per_round.push(denorm_rows(&state, &norm));

    for t in 1..rounds {
        let windows = window_at(t);
        let ctx_refs: Vec<&ConditionWindow<f32>> = (0..rows)
            .map(|r| &windows[r / chains])
            .collect();
        state = match method {
            InferMethod::Restart => {
                let eps_rows: Vec<Vec<f32>> =
                    (0..rows).map(|_| normal_vec(&mut rng, target_dim)).collect();
                let eps = Matrix::from_rows(&eps_rows).map_err(FlowError::Core)?;
                sample_ode_batch(&pre_counter, &eps, &ctx_refs, sampler.nfe)?
            }
            InferMethod::WarmStart | InferMethod::Sequential => {
                let shifted_rows: Vec<Vec<f32>> = (0..rows)
                    .map(|r| shift_and_pad(state.row(r), horizon, state_dim))
                    .collect();
                let shifted = Matrix::from_rows(&shifted_rows).map_err(FlowError::Core)?;
                let renoised = renoise_batch(
                    &shifted,
                    sampler.tau_renoise as f32,
                    path,
                    &mut rng,
                )?;
                if method == InferMethod::WarmStart {
                    sample_ode_batch(&pre_counter, &renoised, &ctx_refs, sampler.nfe)?
                } else {
                    sample_ode_batch(&seq_counter, &renoised, &ctx_refs, sampler.nfe)?
                }
            }
        };
        per_round.push(denorm_rows(&state, &norm));
    }

    Ok(BatchInference {
        per_round,
        nfe_used: pre_counter.count() + seq_counter.count(),
        chains,
        n_traj,
    })
}

fn denorm_rows(state: &Matrix<f32>, norm: &Normalizer) -> Matrix<f32> {
    let rows: Vec<Vec<f32>> = (0..state.rows())
        .map(|r| norm.denormalize_states(state.row(r)))
        .collect();
    Matrix::from_rows(&rows).expect("uniform rows")
}
