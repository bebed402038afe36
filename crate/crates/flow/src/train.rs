//! Training loops: Gaussian-source pretraining and sequential finetuning.
//!
//! Both loops are single-threaded and fully determined by their seed. Loss
//! logs are emitted per epoch as JSON-lines; wall-clock time lives only in
//! the log stream, never in persisted artifacts.

use std::time::Instant;

use rand::seq::SliceRandom;
use serde::Serialize;

use seqflow_core::nn::init_params;
use seqflow_core::optim::{adam_step, OptimizerState};
use seqflow_core::rng::substream;
use seqflow_core::{Checkpoint, CheckpointHeader, MlpConfig, NormStats, ParamVector};

use crate::dataset::{FinetunePair, TrainItem};
use crate::error::{FlowError, Result};
use crate::loss::{fm_loss_and_grad, prepare_finetune_batch, prepare_pretrain_batch};
use crate::path::FlowPath;

#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 4,
            batch_size: 128,
            lr: 1e-3,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(FlowError::Config(
                "train.epochs and train.batch_size must be >= 1".into(),
            ));
        }
        if !(self.lr > 0.0) {
            return Err(FlowError::Config("train.lr must be > 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LogEntry {
    pub epoch: usize,
    pub loss: f64,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct TrainLog {
    pub entries: Vec<LogEntry>,
}

impl TrainLog {
    pub fn to_jsonl(&self) -> String {
        self.entries
            .iter()
            .map(|e| serde_json::to_string(e).expect("plain struct"))
            .collect::<Vec<_>>()
            .join("\n")
    }

    pub fn final_loss(&self) -> Option<f64> {
        self.entries.last().map(|e| e.loss)
    }
}

/// Task metadata stored in the checkpoint header.
#[derive(Debug, Clone)]
pub struct TaskMeta {
    pub task: String,
    pub target_dim: usize,
    pub window_len: usize,
    pub obs_dim: usize,
    pub horizon: usize,
}

enum BatchKind<'a> {
    Pretrain(&'a [TrainItem]),
    Finetune(&'a [FinetunePair], f32),
}

fn run_epochs(
    mut params: ParamVector<f32>,
    cfg: &MlpConfig,
    path: FlowPath,
    data: BatchKind<'_>,
    tc: &TrainConfig,
    log_sink: &mut dyn FnMut(&LogEntry),
) -> Result<(ParamVector<f32>, TrainLog)> {
    let n_items = match &data {
        BatchKind::Pretrain(items) => items.len(),
        BatchKind::Finetune(pairs, _) => pairs.len(),
    };
    if n_items == 0 {
        return Err(FlowError::Config("no training items".into()));
    }
    let mut opt = OptimizerState::<f32>::with_defaults(params.len(), tc.lr);
    let mut log = TrainLog::default();
    let start = Instant::now();

    for epoch in 0..tc.epochs {
        let mut order: Vec<usize> = (0..n_items).collect();
        order.shuffle(&mut substream(tc.seed, "shuffle", epoch as u64));
        let mut rng = substream(tc.seed, "train", epoch as u64);

        let mut epoch_loss = 0.0f64;
        let mut batches = 0usize;
        for chunk in order.chunks(tc.batch_size) {
            let batch = match &data {
                BatchKind::Pretrain(items) => {
                    let refs: Vec<&TrainItem> = chunk.iter().map(|&i| &items[i]).collect();
                    prepare_pretrain_batch(cfg, path, &refs, &mut rng)?
                }
                BatchKind::Finetune(pairs, tau_r) => {
                    let refs: Vec<&FinetunePair> =
                        chunk.iter().map(|&i| &pairs[i]).collect();
                    prepare_finetune_batch(cfg, path, &refs, *tau_r, &mut rng)?
                }
            };
            let (loss, grads) = fm_loss_and_grad(&params, cfg, &batch)
                .map_err(|_| FlowError::Divergence { epoch })?;
            if !loss.is_finite() {
                return Err(FlowError::Divergence { epoch });
            }
            let (next_opt, next_params) =
                adam_step(&opt, &params, &grads).map_err(FlowError::Core)?;
            opt = next_opt;
            params = next_params;
            epoch_loss += loss as f64;
            batches += 1;
        }
        let entry = LogEntry {
            epoch,
            loss: epoch_loss / batches as f64,
            wall_seconds: start.elapsed().as_secs_f64(),
        };
        log_sink(&entry);
        log.entries.push(entry);
    }
    Ok((params, log))
}

/// Train a Gaussian-source model: sources are fresh standard normal draws,
/// so ODE sampling from noise approximates the conditional target law.
pub fn pretrain(
    items: &[TrainItem],
    net_cfg: &MlpConfig,
    path: FlowPath,
    norm: NormStats,
    meta: TaskMeta,
    tc: &TrainConfig,
    mut log_sink: impl FnMut(&LogEntry),
) -> Result<(Checkpoint, TrainLog)> {
    tc.validate()?;
    net_cfg.validate().map_err(FlowError::Core)?;
    let params = init_params::<f32>(net_cfg, &mut substream(tc.seed, "init", 0));
    let (params, log) = run_epochs(
        params,
        net_cfg,
        path,
        BatchKind::Pretrain(items),
        tc,
        &mut log_sink,
    )?;
    let header = CheckpointHeader {
        config: net_cfg.clone(),
        norm,
        flow_path: path.id().to_string(),
        seed: tc.seed,
        task: meta.task,
        target_dim: meta.target_dim,
        window_len: meta.window_len,
        obs_dim: meta.obs_dim,
        horizon: meta.horizon,
    };
    let ckpt =
        Checkpoint::new(header, params.values().to_vec()).map_err(FlowError::Core)?;
    Ok((ckpt, log))
}

/// Finetune the belief-to-belief flow starting from the pretrained weights:
/// each batch re-noises its sources at `tau_renoise`, draws fresh
/// interpolation times, and minimizes the velocity-matching loss.
pub fn finetune_sequential(
    pretrained: &Checkpoint,
    pairs: &[FinetunePair],
    tau_renoise: f64,
    tc: &TrainConfig,
    mut log_sink: impl FnMut(&LogEntry),
) -> Result<(Checkpoint, TrainLog)> {
    tc.validate()?;
    if !(0.0..=1.0).contains(&tau_renoise) {
        return Err(FlowError::Config(format!(
            "tau_renoise must be in [0, 1], got {tau_renoise}"
        )));
    }
    let cfg = pretrained.header.config.clone();
    let path = FlowPath::from_id(&pretrained.header.flow_path)?;
    let params = pretrained.params_as::<f32>();
    let (params, log) = run_epochs(
        params,
        &cfg,
        path,
        BatchKind::Finetune(pairs, tau_renoise as f32),
        tc,
        &mut log_sink,
    )?;
    let mut header = pretrained.header.clone();
    header.seed = tc.seed;
    let ckpt =
        Checkpoint::new(header, params.values().to_vec()).map_err(FlowError::Core)?;
    Ok((ckpt, log))
}
