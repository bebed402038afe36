//! Fixed-topology feed-forward network with exact reverse-mode gradients.
//!
//! Parameters live in a flat [`ParamVector`] whose layout is a pure function
//! of [`MlpConfig`] (per layer: weights row-major, then bias). Hidden layers
//! apply the activation; the output layer is linear. Batched forward/backward
//! variants exist because per-sample calls cannot keep the multiply kernels
//! fed during training.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, CoreError, Result};
use crate::matrix::Matrix;
use crate::rng::StreamRng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Gelu,
}

impl Activation {
    #[inline]
    fn apply<S: Scalar>(self, z: S) -> S {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Gelu => {
                let c = S::from_f64_lossy(0.797_884_560_802_865_4); // sqrt(2/pi)
                let k = S::from_f64_lossy(0.044_715);
                let half = S::from_f64_lossy(0.5);
                half * z * (S::one() + (c * (z + k * z * z * z)).tanh())
            }
        }
    }

    /// Derivative given the pre-activation `z` and post-activation `a`.
    #[inline]
    fn derivative<S: Scalar>(self, z: S, a: S) -> S {
        match self {
            Activation::Tanh => S::one() - a * a,
            Activation::Gelu => {
                let c = S::from_f64_lossy(0.797_884_560_802_865_4);
                let k = S::from_f64_lossy(0.044_715);
                let half = S::from_f64_lossy(0.5);
                let three = S::from_f64_lossy(3.0);
                let u = c * (z + k * z * z * z);
                let t = u.tanh();
                half * (S::one() + t)
                    + half * z * (S::one() - t * t) * c * (S::one() + three * k * z * z)
            }
        }
    }
}

/// Architecture of the velocity / regression network.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub output_dim: usize,
    pub activation: Activation,
    /// Sinusoidal feature count for the interpolation time; the features are
    /// part of `input_dim` and are assembled by the caller.
    pub time_embed_dim: usize,
}

impl MlpConfig {
    pub fn new(
        input_dim: usize,
        hidden_dims: Vec<usize>,
        output_dim: usize,
        activation: Activation,
        time_embed_dim: usize,
    ) -> Result<Self> {
        let cfg = Self {
            input_dim,
            hidden_dims,
            output_dim,
            activation,
            time_embed_dim,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 {
            return Err(CoreError::InvalidConfig(
                "input_dim and output_dim must be >= 1".into(),
            ));
        }
        if self.hidden_dims.is_empty() {
            return Err(CoreError::InvalidConfig("hidden_dims must be non-empty".into()));
        }
        if self.hidden_dims.iter().any(|&d| d == 0) {
            return Err(CoreError::InvalidConfig("hidden dims must be >= 1".into()));
        }
        Ok(())
    }

    /// Per-layer `(in_dim, out_dim)` including the output layer.
    pub fn layer_dims(&self) -> Vec<(usize, usize)> {
        let mut dims = Vec::with_capacity(self.hidden_dims.len() + 1);
        let mut prev = self.input_dim;
        for &h in &self.hidden_dims {
            dims.push((prev, h));
            prev = h;
        }
        dims.push((prev, self.output_dim));
        dims
    }

    /// Total parameter count — a pure function of the config.
    pub fn param_count(&self) -> usize {
        self.layer_dims()
            .iter()
            .map(|&(i, o)| o * i + o)
            .sum()
    }
}

/// Flat parameter vector with the layout fixed by [`MlpConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParamVector<S> {
    values: Vec<S>,
}

impl<S: Scalar> ParamVector<S> {
    pub fn zeros(config: &MlpConfig) -> Self {
        Self {
            values: vec![S::zero(); config.param_count()],
        }
    }

    pub fn from_values(config: &MlpConfig, values: Vec<S>) -> Result<Self> {
        if values.len() != config.param_count() {
            return Err(CoreError::DimensionMismatch {
                context: "ParamVector::from_values",
                expected: config.param_count(),
                actual: values.len(),
            });
        }
        Ok(Self { values })
    }

    /// Construct from a raw vector without a config (for I/O paths that
    /// validate length separately).
    pub fn from_raw(values: Vec<S>) -> Self {
        Self { values }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub fn values(&self) -> &[S] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [S] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<S> {
        self.values
    }

    pub fn cast<T: Scalar>(&self) -> ParamVector<T> {
        ParamVector {
            values: crate::scalar::cast_slice(&self.values),
        }
    }
}

/// Seed-reproducible init: uniform in ±1/sqrt(fan_in) for weights and biases.
pub fn init_params<S: Scalar>(config: &MlpConfig, rng: &mut StreamRng) -> ParamVector<S> {
    let mut values = Vec::with_capacity(config.param_count());
    for (in_dim, out_dim) in config.layer_dims() {
        let bound = 1.0 / (in_dim as f64).sqrt();
        for _ in 0..(out_dim * in_dim + out_dim) {
            values.push(S::from_f64_lossy(
                crate::rng::uniform01::<f64>(rng) * 2.0 * bound - bound,
            ));
        }
    }
    ParamVector { values }
}

/// Weights unpacked into matrices for the multiply kernels.
struct Layers<S> {
    ws: Vec<Matrix<S>>,
    bs: Vec<Vec<S>>,
    activation: Activation,
}

impl<S: Scalar> Layers<S> {
    fn unpack(params: &ParamVector<S>, config: &MlpConfig) -> Result<Self> {
        if params.len() != config.param_count() {
            return Err(CoreError::DimensionMismatch {
                context: "mlp params",
                expected: config.param_count(),
                actual: params.len(),
            });
        }
        let mut ws = Vec::new();
        let mut bs = Vec::new();
        let mut off = 0;
        for (in_dim, out_dim) in config.layer_dims() {
            let w = Matrix::from_fn(out_dim, in_dim, |r, c| {
                params.values[off + r * in_dim + c]
            });
            off += out_dim * in_dim;
            bs.push(params.values[off..off + out_dim].to_vec());
            off += out_dim;
            ws.push(w);
        }
        Ok(Self {
            ws,
            bs,
            activation: config.activation,
        })
    }

    fn n_layers(&self) -> usize {
        self.ws.len()
    }
}

fn pack_grads<S: Scalar>(
    config: &MlpConfig,
    dws: &[Matrix<S>],
    dbs: &[Vec<S>],
) -> ParamVector<S> {
    let mut values = Vec::with_capacity(config.param_count());
    for l in 0..dws.len() {
        values.extend_from_slice(dws[l].data());
        values.extend_from_slice(&dbs[l]);
    }
    ParamVector { values }
}

/// Per-layer pre/post activations from a batched forward pass.
struct BatchTrace<S> {
    /// `activations[0]` is the input batch; `activations[l]` the output of layer l.
    activations: Vec<Matrix<S>>,
    pre_activations: Vec<Matrix<S>>,
}

fn forward_batch_trace<S: Scalar>(
    layers: &Layers<S>,
    inputs: &Matrix<S>,
) -> (Matrix<S>, BatchTrace<S>) {
    let n_layers = layers.n_layers();
    let mut activations = Vec::with_capacity(n_layers + 1);
    let mut pre_activations = Vec::with_capacity(n_layers);
    activations.push(inputs.clone());
    for l in 0..n_layers {
        let prev = &activations[l];
        let mut z = prev.matmul_nt(&layers.ws[l]);
        let bias = &layers.bs[l];
        for r in 0..z.rows() {
            let row = z.row_mut(r);
            for (v, &b) in row.iter_mut().zip(bias) {
                *v = *v + b;
            }
        }
        let a = if l + 1 < n_layers {
            z.map(|v| layers.activation.apply(v))
        } else {
            z.clone()
        };
        pre_activations.push(z);
        activations.push(a);
    }
    let output = activations.last().expect("at least one layer").clone();
    (
        output,
        BatchTrace {
            activations,
            pre_activations,
        },
    )
}

fn backward_batch_inner<S: Scalar>(
    layers: &Layers<S>,
    trace: &BatchTrace<S>,
    upstream: &Matrix<S>,
) -> (Vec<Matrix<S>>, Vec<Vec<S>>, Matrix<S>) {
    let n_layers = layers.n_layers();
    let mut dws = vec![Matrix::<S>::zeros(0, 0); n_layers];
    let mut dbs = vec![Vec::new(); n_layers];

    let mut dz = upstream.clone();
    for l in (0..n_layers).rev() {
        let a_prev = &trace.activations[l];
        dws[l] = dz.matmul_tn(a_prev);
        let mut db = vec![S::zero(); dz.cols()];
        for r in 0..dz.rows() {
            for (acc, &v) in db.iter_mut().zip(dz.row(r)) {
                *acc = *acc + v;
            }
        }
        dbs[l] = db;
        let da_prev = dz.matmul(&layers.ws[l]);
        if l == 0 {
            dz = da_prev;
        } else {
            // chain through the activation of the previous hidden layer
            let act = layers.activation;
            let mut next = da_prev;
            let zs = trace.pre_activations[l - 1].data();
            let post = trace.activations[l].data();
            for (idx, v) in next.data_mut().iter_mut().enumerate() {
                *v = *v * act.derivative(zs[idx], post[idx]);
            }
            dz = next;
        }
    }
    (dws, dbs, dz)
}

/// Evaluate the network on one input vector.
pub fn mlp_forward<S: Scalar>(
    params: &ParamVector<S>,
    config: &MlpConfig,
    input: &[S],
) -> Result<Vec<S>> {
    if input.len() != config.input_dim {
        return Err(CoreError::DimensionMismatch {
            context: "mlp_forward input",
            expected: config.input_dim,
            actual: input.len(),
        });
    }
    let layers = Layers::unpack(params, config)?;
    let mut a = input.to_vec();
    let n_layers = layers.n_layers();
    for l in 0..n_layers {
        let mut z = layers.ws[l].matvec(&a);
        for (v, &b) in z.iter_mut().zip(&layers.bs[l]) {
            *v = *v + b;
        }
        a = if l + 1 < n_layers {
            z.into_iter().map(|v| layers.activation.apply(v)).collect()
        } else {
            z
        };
    }
    ensure_finite("mlp_forward output", &a)?;
    Ok(a)
}

/// Evaluate the network on a batch (one input per row).
pub fn mlp_forward_batch<S: Scalar>(
    params: &ParamVector<S>,
    config: &MlpConfig,
    inputs: &Matrix<S>,
) -> Result<Matrix<S>> {
    if inputs.cols() != config.input_dim {
        return Err(CoreError::DimensionMismatch {
            context: "mlp_forward_batch input",
            expected: config.input_dim,
            actual: inputs.cols(),
        });
    }
    let layers = Layers::unpack(params, config)?;
    let (output, _) = forward_batch_trace(&layers, inputs);
    output.validate_finite("mlp_forward_batch output")?;
    Ok(output)
}

/// Exact gradients of `⟨upstream, mlp_forward(params, input)⟩` with respect
/// to the parameters and the input.
pub fn mlp_backward<S: Scalar>(
    params: &ParamVector<S>,
    config: &MlpConfig,
    input: &[S],
    upstream: &[S],
) -> Result<(ParamVector<S>, Vec<S>)> {
    if upstream.len() != config.output_dim {
        return Err(CoreError::DimensionMismatch {
            context: "mlp_backward upstream",
            expected: config.output_dim,
            actual: upstream.len(),
        });
    }
    if input.len() != config.input_dim {
        return Err(CoreError::DimensionMismatch {
            context: "mlp_backward input",
            expected: config.input_dim,
            actual: input.len(),
        });
    }
    let inputs = Matrix::from_rows(&[input.to_vec()]).expect("single row");
    let ups = Matrix::from_rows(&[upstream.to_vec()]).expect("single row");
    let (grads, dinput) = mlp_backward_batch(params, config, &inputs, &ups)?;
    Ok((grads, dinput.row(0).to_vec()))
}

/// Batched variant of [`mlp_backward`]: gradients of
/// `Σ_rows ⟨upstream_row, mlp_forward(input_row)⟩`, parameter gradients summed
/// over the batch, input gradients per row.
pub fn mlp_backward_batch<S: Scalar>(
    params: &ParamVector<S>,
    config: &MlpConfig,
    inputs: &Matrix<S>,
    upstream: &Matrix<S>,
) -> Result<(ParamVector<S>, Matrix<S>)> {
    if inputs.cols() != config.input_dim {
        return Err(CoreError::DimensionMismatch {
            context: "mlp_backward_batch input",
            expected: config.input_dim,
            actual: inputs.cols(),
        });
    }
    if upstream.cols() != config.output_dim || upstream.rows() != inputs.rows() {
        return Err(CoreError::DimensionMismatch {
            context: "mlp_backward_batch upstream",
            expected: config.output_dim * inputs.rows(),
            actual: upstream.cols() * upstream.rows(),
        });
    }
    let layers = Layers::unpack(params, config)?;
    let (_, trace) = forward_batch_trace(&layers, inputs);
    let (dws, dbs, dinput) = backward_batch_inner(&layers, &trace, upstream);
    let grads = pack_grads(config, &dws, &dbs);
    ensure_finite("mlp_backward_batch grads", grads.values())?;
    Ok((grads, dinput))
}

/// Forward pass that also returns a closure-free handle for one backward pass
/// without recomputing activations (training hot path).
pub struct ForwardBackward<S> {
    layers: Layers<S>,
    trace: BatchTrace<S>,
    output: Matrix<S>,
}

impl<S: Scalar> ForwardBackward<S> {
    pub fn run(
        params: &ParamVector<S>,
        config: &MlpConfig,
        inputs: &Matrix<S>,
    ) -> Result<Self> {
        if inputs.cols() != config.input_dim {
            return Err(CoreError::DimensionMismatch {
                context: "ForwardBackward input",
                expected: config.input_dim,
                actual: inputs.cols(),
            });
        }
        let layers = Layers::unpack(params, config)?;
        let (output, trace) = forward_batch_trace(&layers, inputs);
        Ok(Self {
            layers,
            trace,
            output,
        })
    }

    pub fn output(&self) -> &Matrix<S> {
        &self.output
    }

    pub fn backward(&self, config: &MlpConfig, upstream: &Matrix<S>) -> Result<ParamVector<S>> {
        let (dws, dbs, _) = backward_batch_inner(&self.layers, &self.trace, upstream);
        let grads = pack_grads(config, &dws, &dbs);
        ensure_finite("ForwardBackward grads", grads.values())?;
        Ok(grads)
    }
}

/// Sinusoidal features for the interpolation time.
///
/// Interleaved `[sin(τ·ω_k), cos(τ·ω_k)]` with `ω_k = 10000^(−2k/dim)`.
pub fn time_embed<S: Scalar>(tau: S, dim: usize) -> Result<Vec<S>> {
    let t = tau.to_f64_lossy();
    if !(0.0..=1.0).contains(&t) {
        return Err(CoreError::OutOfRange(format!(
            "time_embed: tau must be in [0, 1], got {t}"
        )));
    }
    if dim < 2 || dim % 2 != 0 {
        return Err(CoreError::InvalidConfig(format!(
            "time_embed: dim must be even and >= 2, got {dim}"
        )));
    }
    let mut out = Vec::with_capacity(dim);
    let half = dim / 2;
    for k in 0..half {
        let omega = 10_000f64.powf(-2.0 * k as f64 / dim as f64);
        out.push(S::from_f64_lossy((t * omega).sin()));
        out.push(S::from_f64_lossy((t * omega).cos()));
    }
    Ok(out)
}
