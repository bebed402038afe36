//! Task encodings, normalization, and training-pair construction.
//!
//! For forecasting, the predicted variable at round `t` is the flattened
//! horizon `s_{t+1..t+H}`; for state estimation it is `s_t`. All network
//! traffic happens in z-scored space; per-state-dimension statistics are
//! shared across horizon positions so that shift-and-pad commutes with
//! normalization.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use seqflow_core::rng::substream;
use seqflow_core::{Checkpoint, Matrix, NormStats};
use seqflow_dynamics::TrajectorySet;

use crate::error::{FlowError, Result};
use crate::sampler::sample_ode_batch;
use crate::velocity::MlpVelocity;
use crate::window::ConditionWindow;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowTask {
    Forecast { horizon: usize },
    Estimate,
}

impl FlowTask {
    pub fn horizon(&self) -> usize {
        match self {
            FlowTask::Forecast { horizon } => *horizon,
            FlowTask::Estimate => 1,
        }
    }

    pub fn id(&self) -> &'static str {
        match self {
            FlowTask::Forecast { .. } => "forecast",
            FlowTask::Estimate => "estimate",
        }
    }

    pub fn target_dim(&self, state_dim: usize) -> usize {
        match self {
            FlowTask::Forecast { horizon } => horizon * state_dim,
            FlowTask::Estimate => state_dim,
        }
    }

    /// Prediction rounds available in a trajectory of length `t_len`
    /// (0-based round `t` conditions on observations `0..=t`).
    pub fn rounds(&self, t_len: usize) -> usize {
        match self {
            FlowTask::Forecast { horizon } => t_len.saturating_sub(*horizon),
            FlowTask::Estimate => t_len,
        }
    }

    /// Ground-truth value of the predicted variable at round `t`.
    pub fn truth(&self, ts: &TrajectorySet, traj: usize, t: usize) -> Vec<f32> {
        match self {
            FlowTask::Forecast { horizon } => {
                let mut out = Vec::with_capacity(horizon * ts.state_dim());
                for h in 1..=*horizon {
                    out.extend_from_slice(ts.state(traj, t + h));
                }
                out
            }
            FlowTask::Estimate => ts.state(traj, t).to_vec(),
        }
    }
}

/// Per-dimension z-scoring, state stats shared across horizon positions.
#[derive(Debug, Clone)]
pub struct Normalizer {
    pub state_mean: Vec<f64>,
    pub state_std: Vec<f64>,
    pub obs_mean: Vec<f64>,
    pub obs_std: Vec<f64>,
}

impl Normalizer {
    pub fn fit(ts: &TrajectorySet) -> Self {
        let fit_dim = |dim: usize, get: &dyn Fn(usize, usize) -> f64, count: usize| {
            let mut mean = vec![0.0f64; dim];
            let mut sq = vec![0.0f64; dim];
            for i in 0..count {
                for k in 0..dim {
                    let v = get(i, k);
                    mean[k] += v;
                    sq[k] += v * v;
                }
            }
            let n = count as f64;
            let std: Vec<f64> = (0..dim)
                .map(|k| {
                    let m = mean[k] / n;
                    let var = (sq[k] / n - m * m).max(0.0);
                    let s = var.sqrt();
                    if s < 1e-6 {
                        1.0
                    } else {
                        s
                    }
                })
                .collect();
            for m in &mut mean {
                *m /= n;
            }
            (mean, std)
        };

        let steps = ts.n_traj() * ts.t_len();
        let sd = ts.state_dim();
        let od = ts.obs_dim();
        let (state_mean, state_std) = fit_dim(
            sd,
            &|i, k| ts.state(i / ts.t_len(), i % ts.t_len())[k] as f64,
            steps,
        );
        let (obs_mean, obs_std) = fit_dim(
            od,
            &|i, k| ts.observation(i / ts.t_len(), i % ts.t_len())[k] as f64,
            steps,
        );
        Self {
            state_mean,
            state_std,
            obs_mean,
            obs_std,
        }
    }

    pub fn from_stats(stats: &NormStats) -> Self {
        Self {
            state_mean: stats.target_mean.clone(),
            state_std: stats.target_std.clone(),
            obs_mean: stats.obs_mean.clone(),
            obs_std: stats.obs_std.clone(),
        }
    }

    pub fn to_stats(&self) -> NormStats {
        NormStats {
            target_mean: self.state_mean.clone(),
            target_std: self.state_std.clone(),
            obs_mean: self.obs_mean.clone(),
            obs_std: self.obs_std.clone(),
        }
    }

    /// Normalize a flattened block of repeated state vectors.
    pub fn normalize_states(&self, raw: &[f32]) -> Vec<f32> {
        let d = self.state_mean.len();
        raw.iter()
            .enumerate()
            .map(|(i, &v)| ((v as f64 - self.state_mean[i % d]) / self.state_std[i % d]) as f32)
            .collect()
    }

    pub fn denormalize_states(&self, norm: &[f32]) -> Vec<f32> {
        let d = self.state_mean.len();
        norm.iter()
            .enumerate()
            .map(|(i, &v)| (v as f64 * self.state_std[i % d] + self.state_mean[i % d]) as f32)
            .collect()
    }

    pub fn normalize_obs_series(&self, raw: &[f32]) -> Vec<f32> {
        let d = self.obs_mean.len();
        raw.iter()
            .enumerate()
            .map(|(i, &v)| ((v as f64 - self.obs_mean[i % d]) / self.obs_std[i % d]) as f32)
            .collect()
    }
}

/// One pretraining example: a normalized target and its context window.
#[derive(Debug, Clone)]
pub struct TrainItem {
    pub target: Vec<f32>,
    pub ctx: ConditionWindow<f32>,
}

/// One finetuning example: a source aligned per physical time with the
/// target. Sources carry no noise; re-noising happens per training visit.
#[derive(Debug, Clone)]
pub struct FinetunePair {
    pub source: Vec<f32>,
    pub target: Vec<f32>,
    pub ctx: ConditionWindow<f32>,
}

/// Align an H-step horizon predicted at time t−1 with time t: drop the first
/// step (already observed) and duplicate the last.
pub fn shift_and_pad(source: &[f32], horizon: usize, state_dim: usize) -> Vec<f32> {
    debug_assert_eq!(source.len(), horizon * state_dim);
    if horizon == 1 {
        return source.to_vec();
    }
    let mut out = Vec::with_capacity(source.len());
    out.extend_from_slice(&source[state_dim..]);
    out.extend_from_slice(&source[(horizon - 1) * state_dim..]);
    out
}

/// All pretraining items of a trajectory set, normalized.
pub fn pretrain_items(
    ts: &TrajectorySet,
    task: &FlowTask,
    window_len: usize,
    norm: &Normalizer,
) -> Vec<TrainItem> {
    let mut items = Vec::new();
    for traj in 0..ts.n_traj() {
        let obs_norm = norm.normalize_obs_series(ts.observations_of(traj));
        for t in 0..task.rounds(ts.t_len()) {
            let target = norm.normalize_states(&task.truth(ts, traj, t));
            let ctx = ConditionWindow::from_flat(&obs_norm, ts.obs_dim(), t, window_len);
            items.push(TrainItem { target, ctx });
        }
    }
    items
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairMode {
    /// Sources sampled from the pretrained model (the default: aligns the
    /// training source distribution with what inference will actually see).
    Rollout { nfe: usize },
    /// Sources taken from ground-truth trajectories (ablation).
    GroundTruth,
}

/// Construct finetuning pairs: for each round `t ≥ 1`, the source is the
/// previous round's prediction target (model rollout or ground truth),
/// shifted-and-padded onto round `t`'s physical times; the target is ground
/// truth; the context ends at `z_t`.
pub fn build_finetune_pairs(
    pretrained: &Checkpoint,
    ts: &TrajectorySet,
    task: &FlowTask,
    mode: PairMode,
    seed: u64,
) -> Result<Vec<FinetunePair>> {
    let window_len = pretrained.header.window_len;
    let norm = Normalizer::from_stats(&pretrained.header.norm);
    let state_dim = ts.state_dim();
    let horizon = task.horizon();
    let rounds = task.rounds(ts.t_len());
    if rounds < 2 {
        return Err(FlowError::Config(format!(
            "trajectory length {} leaves no finetuning rounds for horizon {horizon}",
            ts.t_len()
        )));
    }
    let field = MlpVelocity::<f32>::from_checkpoint(pretrained)?;

    let per_traj: Vec<Result<Vec<FinetunePair>>> = (0..ts.n_traj())
        .into_par_iter()
        .map(|traj| {
            let mut rng = substream(seed, "pairs", traj as u64);
            let obs_norm = norm.normalize_obs_series(ts.observations_of(traj));
            let windows: Vec<ConditionWindow<f32>> = (0..rounds)
                .map(|t| ConditionWindow::from_flat(&obs_norm, ts.obs_dim(), t, window_len))
                .collect();

            // previous-round sources for t = 1..rounds, batched over t
            let sources_prev: Vec<Vec<f32>> = match mode {
                PairMode::Rollout { nfe } => {
                    let n = rounds - 1;
                    let dim = task.target_dim(state_dim);
                    let eps: Vec<Vec<f32>> = (0..n)
                        .map(|_| seqflow_core::rng::normal_vec(&mut rng, dim))
                        .collect();
                    let sources = Matrix::from_rows(&eps).map_err(FlowError::Core)?;
                    let ctx_refs: Vec<&ConditionWindow<f32>> =
                        (0..n).map(|i| &windows[i]).collect();
                    let out = sample_ode_batch(&field, &sources, &ctx_refs, nfe)?;
                    (0..n).map(|i| out.row(i).to_vec()).collect()
                }
                PairMode::GroundTruth => (0..rounds - 1)
                    .map(|t| norm.normalize_states(&task.truth(ts, traj, t)))
                    .collect(),
            };

            let mut pairs = Vec::with_capacity(rounds - 1);
            for t in 1..rounds {
                let source = shift_and_pad(&sources_prev[t - 1], horizon, state_dim);
                let target = norm.normalize_states(&task.truth(ts, traj, t));
                pairs.push(FinetunePair {
                    source,
                    target,
                    ctx: windows[t].clone(),
                });
            }
            Ok(pairs)
        })
        .collect();

    let mut all = Vec::new();
    for r in per_traj {
        all.extend(r?);
    }
    Ok(all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use seqflow_dynamics::{generate_dataset, SystemConfig};

    #[test]
    fn shift_and_pad_drops_first_duplicates_last() {
        // H=3, state_dim=2: (s_t, s_t+1, s_t+2) -> (s_t+1, s_t+2, s_t+2)
        let src = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let out = shift_and_pad(&src, 3, 2);
        assert_eq!(out, vec![3.0, 4.0, 5.0, 6.0, 5.0, 6.0]);
    }

    #[test]
    fn shift_and_pad_identity_for_single_step() {
        let src = vec![1.0, 2.0, 3.0];
        assert_eq!(shift_and_pad(&src, 1, 3), src);
    }

    #[test]
    fn forecast_truth_is_future_window() {
        let cfg = SystemConfig::chain(0.9, 0.0, 0.0);
        let ts = generate_dataset(&cfg, 1, 8, 0).unwrap();
        let task = FlowTask::Forecast { horizon: 3 };
        let truth = task.truth(&ts, 0, 2);
        assert_eq!(truth.len(), 3);
        assert_eq!(truth[0], ts.state(0, 3)[0]);
        assert_eq!(truth[2], ts.state(0, 5)[0]);
        assert_eq!(task.rounds(8), 5);
    }

    #[test]
    fn normalizer_round_trip_and_padding_zero() {
        let cfg = SystemConfig::lorenz(0.0);
        let ts = generate_dataset(&cfg, 3, 20, 7).unwrap();
        let norm = Normalizer::fit(&ts);
        let raw = ts.state(1, 5).to_vec();
        let back = norm.denormalize_states(&norm.normalize_states(&raw));
        for (a, b) in raw.iter().zip(&back) {
            assert!((a - b).abs() < 1e-4, "{a} vs {b}");
        }
        // z-scored data has ~zero mean so zero padding is the data mean
        let items = pretrain_items(&ts, &FlowTask::Estimate, 8, &norm);
        assert_eq!(items.len(), 3 * 20);
        assert_eq!(items[0].ctx.flat_len(), 8 * 3);
    }

    #[test]
    fn ground_truth_pairs_for_estimation_use_previous_state() {
        let cfg = SystemConfig::chain(0.9, 0.0, 0.0);
        let ts = generate_dataset(&cfg, 2, 6, 1).unwrap();
        let norm = Normalizer::fit(&ts);
        // minimal checkpoint to satisfy the interface
        let net = seqflow_core::MlpConfig::new(
            1 + 2 + 4,
            vec![4],
            1,
            seqflow_core::Activation::Tanh,
            2,
        )
        .unwrap();
        let header = seqflow_core::CheckpointHeader {
            config: net.clone(),
            norm: norm.to_stats(),
            flow_path: "straight".into(),
            seed: 0,
            task: "estimate".into(),
            target_dim: 1,
            window_len: 4,
            obs_dim: 1,
            horizon: 1,
        };
        let ckpt = seqflow_core::Checkpoint::new(
            header,
            vec![0.0; net.param_count()],
        )
        .unwrap();
        let pairs = build_finetune_pairs(
            &ckpt,
            &ts,
            &FlowTask::Estimate,
            PairMode::GroundTruth,
            3,
        )
        .unwrap();
        assert_eq!(pairs.len(), 2 * 5);
        // source at round t is the normalized state at t-1, unshifted
        let expect = norm.normalize_states(ts.state(0, 0));
        assert_eq!(pairs[0].source, expect);
    }
}
