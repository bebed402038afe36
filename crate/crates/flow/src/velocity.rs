//! Velocity-field abstraction over the conditional network.
//!
//! Tests inject analytic fields through the same trait the sampler uses, and
//! the counting wrapper provides the instrumentation hook for function-
//! evaluation accounting.

use std::cell::Cell;

use seqflow_core::nn::{mlp_forward_batch, time_embed};
use seqflow_core::{Checkpoint, CoreError, Matrix, MlpConfig, ParamVector, Scalar};

use crate::error::{FlowError, Result};
use crate::window::ConditionWindow;

pub trait VelocityField<S: Scalar> {
    /// Dimension of the transported variable.
    fn dim(&self) -> usize;

    /// `v(x, τ; context)` for a batch of states sharing one `τ`; row `r` of
    /// `xs` pairs with `ctxs[r]`.
    fn velocity_batch(
        &self,
        xs: &Matrix<S>,
        tau: S,
        ctxs: &[&ConditionWindow<S>],
    ) -> Result<Matrix<S>>;

    fn velocity(&self, x: &[S], tau: S, ctx: &ConditionWindow<S>) -> Result<Vec<S>> {
        let xs = Matrix::from_rows(&[x.to_vec()]).map_err(FlowError::Core)?;
        let out = self.velocity_batch(&xs, tau, &[ctx])?;
        Ok(out.row(0).to_vec())
    }
}

/// The learned conditional velocity network. Inputs are assembled as
/// `concat(x(τ), time_embed(τ), window)`.
#[derive(Debug, Clone)]
pub struct MlpVelocity<S> {
    config: MlpConfig,
    params: ParamVector<S>,
}

impl<S: Scalar> MlpVelocity<S> {
    pub fn new(config: MlpConfig, params: ParamVector<S>) -> Result<Self> {
        if params.len() != config.param_count() {
            return Err(FlowError::Core(CoreError::DimensionMismatch {
                context: "MlpVelocity params",
                expected: config.param_count(),
                actual: params.len(),
            }));
        }
        Ok(Self { config, params })
    }

    pub fn from_checkpoint(ckpt: &Checkpoint) -> Result<Self> {
        let expected =
            ckpt.header.target_dim + ckpt.header.config.time_embed_dim
                + ckpt.header.window_len * ckpt.header.obs_dim;
        if ckpt.header.config.input_dim != expected {
            return Err(FlowError::Config(format!(
                "checkpoint input_dim {} does not match target {} + embed {} + window {}",
                ckpt.header.config.input_dim,
                ckpt.header.target_dim,
                ckpt.header.config.time_embed_dim,
                ckpt.header.window_len * ckpt.header.obs_dim
            )));
        }
        Self::new(ckpt.header.config.clone(), ckpt.params_as::<S>())
    }

    pub fn config(&self) -> &MlpConfig {
        &self.config
    }

    pub fn params(&self) -> &ParamVector<S> {
        &self.params
    }

    fn x_dim(&self) -> usize {
        self.config.output_dim
    }
}

/// Build the network input rows for a batch sharing one τ.
pub fn assemble_inputs<S: Scalar>(
    config: &MlpConfig,
    xs: &Matrix<S>,
    tau: S,
    ctxs: &[&ConditionWindow<S>],
) -> Result<Matrix<S>> {
    let n = xs.rows();
    if ctxs.len() != n {
        return Err(FlowError::Core(CoreError::DimensionMismatch {
            context: "assemble_inputs contexts",
            expected: n,
            actual: ctxs.len(),
        }));
    }
    let embed = time_embed::<S>(tau, config.time_embed_dim).map_err(FlowError::Core)?;
    let row_len = xs.cols() + embed.len() + ctxs[0].flat_len();
    if row_len != config.input_dim {
        return Err(FlowError::Core(CoreError::DimensionMismatch {
            context: "assemble_inputs row",
            expected: config.input_dim,
            actual: row_len,
        }));
    }
    let mut inputs = Matrix::zeros(n, row_len);
    for r in 0..n {
        let row = inputs.row_mut(r);
        let x = xs.row(r);
        row[..x.len()].copy_from_slice(x);
        row[x.len()..x.len() + embed.len()].copy_from_slice(&embed);
        row[x.len() + embed.len()..].copy_from_slice(ctxs[r].data());
    }
    Ok(inputs)
}

impl<S: Scalar> VelocityField<S> for MlpVelocity<S> {
    fn dim(&self) -> usize {
        self.x_dim()
    }

    fn velocity_batch(
        &self,
        xs: &Matrix<S>,
        tau: S,
        ctxs: &[&ConditionWindow<S>],
    ) -> Result<Matrix<S>> {
        let inputs = assemble_inputs(&self.config, xs, tau, ctxs)?;
        mlp_forward_batch(&self.params, &self.config, &inputs).map_err(FlowError::Core)
    }
}

/// Instrumentation wrapper counting velocity evaluations (one per row).
pub struct CountingField<'a, S: Scalar, F: VelocityField<S>> {
    inner: &'a F,
    count: Cell<u64>,
    _marker: std::marker::PhantomData<S>,
}

impl<'a, S: Scalar, F: VelocityField<S>> CountingField<'a, S, F> {
    pub fn new(inner: &'a F) -> Self {
        Self {
            inner,
            count: Cell::new(0),
            _marker: std::marker::PhantomData,
        }
    }

    pub fn count(&self) -> u64 {
        self.count.get()
    }
}

impl<S: Scalar, F: VelocityField<S>> VelocityField<S> for CountingField<'_, S, F> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn velocity_batch(
        &self,
        xs: &Matrix<S>,
        tau: S,
        ctxs: &[&ConditionWindow<S>],
    ) -> Result<Matrix<S>> {
        self.count.set(self.count.get() + xs.rows() as u64);
        self.inner.velocity_batch(xs, tau, ctxs)
    }
}

/// Analytic field from a closure (test and oracle injection).
pub struct FnField<S, F>
where
    F: Fn(&[S], S, &ConditionWindow<S>) -> Vec<S>,
{
    dim: usize,
    f: F,
    _marker: std::marker::PhantomData<S>,
}

impl<S: Scalar, F: Fn(&[S], S, &ConditionWindow<S>) -> Vec<S>> FnField<S, F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self {
            dim,
            f,
            _marker: std::marker::PhantomData,
        }
    }
}

impl<S: Scalar, F: Fn(&[S], S, &ConditionWindow<S>) -> Vec<S>> VelocityField<S>
    for FnField<S, F>
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn velocity_batch(
        &self,
        xs: &Matrix<S>,
        tau: S,
        ctxs: &[&ConditionWindow<S>],
    ) -> Result<Matrix<S>> {
        let rows: Vec<Vec<S>> = (0..xs.rows())
            .map(|r| (self.f)(xs.row(r), tau, ctxs[r]))
            .collect();
        Matrix::from_rows(&rows).map_err(FlowError::Core)
    }
}
