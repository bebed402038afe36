//! Bias-corrected adaptive moment optimizer.

use crate::error::{CoreError, Result};
use crate::nn::ParamVector;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct OptimizerState<S> {
    pub step: u64,
    pub first_moment: Vec<S>,
    pub second_moment: Vec<S>,
    pub lr: S,
    pub beta1: S,
    pub beta2: S,
    pub eps: S,
}

impl<S: Scalar> OptimizerState<S> {
    pub fn new(len: usize, lr: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Self {
            step: 0,
            first_moment: vec![S::zero(); len],
            second_moment: vec![S::zero(); len],
            lr: S::from_f64_lossy(lr),
            beta1: S::from_f64_lossy(beta1),
            beta2: S::from_f64_lossy(beta2),
            eps: S::from_f64_lossy(eps),
        }
    }

    /// Conventional defaults: lr 1e-3, betas (0.9, 0.999), eps 1e-8.
    pub fn with_defaults(len: usize, lr: f64) -> Self {
        Self::new(len, lr, 0.9, 0.999, 1e-8)
    }
}

/// One optimizer update. Returns the advanced state and updated parameters.
pub fn adam_step<S: Scalar>(
    state: &OptimizerState<S>,
    params: &ParamVector<S>,
    grads: &ParamVector<S>,
) -> Result<(OptimizerState<S>, ParamVector<S>)> {
    if grads.len() != params.len() || state.first_moment.len() != params.len() {
        return Err(CoreError::DimensionMismatch {
            context: "adam_step",
            expected: params.len(),
            actual: grads.len(),
        });
    }
    if let Some(index) = grads.values().iter().position(|g| !g.is_finite()) {
        return Err(CoreError::NonFinite {
            context: "adam_step gradient",
            index,
            value: grads.values()[index].to_f64_lossy(),
        });
    }

    let mut next = state.clone();
    next.step = state.step + 1;
    let t = next.step as i32;
    let one = S::one();
    let bc1 = one - state.beta1.powi(t);
    let bc2 = one - state.beta2.powi(t);

    let mut new_params = params.values().to_vec();
    for i in 0..new_params.len() {
        let g = grads.values()[i];
        let m = state.beta1 * state.first_moment[i] + (one - state.beta1) * g;
        let v = state.beta2 * state.second_moment[i] + (one - state.beta2) * g * g;
        next.first_moment[i] = m;
        next.second_moment[i] = v;
        let m_hat = m / bc1;
        let v_hat = v / bc2;
        new_params[i] = new_params[i] - state.lr * m_hat / (v_hat.sqrt() + state.eps);
    }
    Ok((next, ParamVector::from_raw(new_params)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, MlpConfig};

    fn one_param_config() -> MlpConfig {
        // 1x1 linear-ish net: 1 weight + 1 bias per layer; we only care about lengths
        MlpConfig::new(1, vec![1], 1, Activation::Tanh, 2).unwrap()
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let cfg = one_param_config();
        let params = ParamVector::<f64>::from_values(&cfg, vec![0.5; cfg.param_count()]).unwrap();
        let grads = ParamVector::zeros(&cfg);
        let state = OptimizerState::with_defaults(params.len(), 1e-3);
        let (next, updated) = adam_step(&state, &params, &grads).unwrap();
        assert_eq!(next.step, 1);
        assert_eq!(updated.values(), params.values());
    }

    #[test]
    fn first_step_magnitude_is_lr_sign() {
        // from zeroed moments: m_hat = g, v_hat = g^2, update = lr*g/(|g|+eps)
        let cfg = one_param_config();
        let params = ParamVector::<f64>::zeros(&cfg);
        let g = -3.7;
        let grads =
            ParamVector::from_values(&cfg, vec![g; cfg.param_count()]).unwrap();
        let state = OptimizerState::with_defaults(params.len(), 1e-3);
        let (_, updated) = adam_step(&state, &params, &grads).unwrap();
        for &p in updated.values() {
            assert!((p - 1e-3).abs() < 1e-8, "expected ~ +lr, got {p}");
        }
    }

    #[test]
    fn descends_quadratic_monotonically() {
        // minimize f(x) = (x - 2)^2 / 2, grad = x - 2, from x = 10
        let cfg = one_param_config();
        let n = cfg.param_count();
        let mut params = ParamVector::from_values(&cfg, vec![10.0f64; n]).unwrap();
        let mut state = OptimizerState::with_defaults(n, 0.05);
        let mut prev = params.values()[0];
        for _ in 0..400 {
            let grads = ParamVector::from_values(
                &cfg,
                params.values().iter().map(|&x| x - 2.0).collect(),
            )
            .unwrap();
            let (s, p) = adam_step(&state, &params, &grads).unwrap();
            state = s;
            params = p;
            let x = params.values()[0];
            assert!(x <= prev + 1e-12, "not monotone: {x} > {prev}");
            prev = x;
        }
        assert!((params.values()[0] - 2.0).abs() < 0.3);
    }

    #[test]
    fn non_finite_gradient_reports_index() {
        let cfg = one_param_config();
        let params = ParamVector::<f64>::zeros(&cfg);
        let mut g = vec![0.0; cfg.param_count()];
        g[2] = f64::NAN;
        let grads = ParamVector::from_values(&cfg, g).unwrap();
        let state = OptimizerState::with_defaults(params.len(), 1e-3);
        match adam_step(&state, &params, &grads).unwrap_err() {
            CoreError::NonFinite { index, .. } => assert_eq!(index, 2),
            other => panic!("unexpected {other:?}"),
        }
    }
}
