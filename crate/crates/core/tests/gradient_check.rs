//! Gradient and forward-pass oracles for the MLP.
//!
//! The backward pass is checked against central finite differences in f64;
//! the forward pass against a separate straight-line re-implementation of
//! the same parameter layout.

use seqflow_core::matrix::dot;
use seqflow_core::nn::{init_params, mlp_backward, mlp_forward, Activation, MlpConfig};
use seqflow_core::numdiff::{grad_central, max_rel_error};
use seqflow_core::rng::{normal_vec, substream, uniform01};
use seqflow_core::Params64;

/// Independent forward pass: plain loops over the flat layout, sharing no
/// code with `mlp_forward`.
fn reference_forward(cfg: &MlpConfig, params: &[f64], input: &[f64]) -> Vec<f64> {
    let mut dims = vec![cfg.input_dim];
    dims.extend_from_slice(&cfg.hidden_dims);
    dims.push(cfg.output_dim);

    let mut a = input.to_vec();
    let mut off = 0usize;
    for layer in 0..dims.len() - 1 {
        let (n_in, n_out) = (dims[layer], dims[layer + 1]);
        let mut z = vec![0.0f64; n_out];
        for (o, zo) in z.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (i, &x) in a.iter().enumerate() {
                acc += params[off + o * n_in + i] * x;
            }
            *zo = acc + params[off + n_out * n_in + o];
        }
        off += n_out * n_in + n_out;
        let last = layer == dims.len() - 2;
        a = if last {
            z
        } else {
            z.into_iter()
                .map(|v| match cfg.activation {
                    Activation::Tanh => v.tanh(),
                    Activation::Gelu => {
                        0.5 * v
                            * (1.0
                                + ((2.0f64 / std::f64::consts::PI).sqrt()
                                    * (v + 0.044715 * v * v * v))
                                    .tanh())
                    }
                })
                .collect()
        };
    }
    a
}

fn random_config(rng: &mut seqflow_core::rng::StreamRng) -> MlpConfig {
    let dim = |rng: &mut seqflow_core::rng::StreamRng, lo: usize, hi: usize| {
        lo + (uniform01::<f64>(rng) * (hi - lo + 1) as f64) as usize
    };
    let n_hidden = dim(rng, 1, 3);
    let hidden: Vec<usize> = (0..n_hidden).map(|_| dim(rng, 2, 10)).collect();
    let act = if uniform01::<f64>(rng) < 0.5 {
        Activation::Tanh
    } else {
        Activation::Gelu
    };
    MlpConfig::new(dim(rng, 1, 6), hidden, dim(rng, 1, 5), act, 2).unwrap()
}

#[test]
fn forward_matches_reference_implementation() {
    let cfg = MlpConfig::new(5, vec![7, 6], 4, Activation::Tanh, 2).unwrap();
    let params: Params64 = init_params(&cfg, &mut substream(42, "init", 0));
    let input: Vec<f64> = normal_vec(&mut substream(42, "input", 0), 5);
    let ours = mlp_forward(&params, &cfg, &input).unwrap();
    let reference = reference_forward(&cfg, params.values(), &input);
    for (a, b) in ours.iter().zip(&reference) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
}

#[test]
fn forward_matches_reference_random_architectures() {
    for case in 0..25 {
        let mut rng = substream(100, "fwdcase", case);
        let cfg = random_config(&mut rng);
        let params: Params64 = init_params(&cfg, &mut rng);
        let input: Vec<f64> = normal_vec(&mut rng, cfg.input_dim);
        let ours = mlp_forward(&params, &cfg, &input).unwrap();
        let reference = reference_forward(&cfg, params.values(), &input);
        for (a, b) in ours.iter().zip(&reference) {
            assert!((a - b).abs() < 1e-12, "case {case}: {a} vs {b}");
        }
    }
}

/// 100 random (config, params, input) triples: analytic gradients match
/// central finite differences (h = 1e-6) with max relative error < 1e-4.
#[test]
fn backward_matches_finite_differences_100_cases() {
    let mut worst = 0.0f64;
    for case in 0..100 {
        let mut rng = substream(7, "gradcase", case);
        let cfg = random_config(&mut rng);
        let params: Params64 = init_params(&cfg, &mut rng);
        let input: Vec<f64> = normal_vec(&mut rng, cfg.input_dim);
        let upstream: Vec<f64> = normal_vec(&mut rng, cfg.output_dim);

        let (analytic_p, analytic_x) =
            mlp_backward(&params, &cfg, &input, &upstream).unwrap();

        let loss_of_params = |p: &[f64]| {
            let pv = Params64::from_raw(p.to_vec());
            let out = mlp_forward(&pv, &cfg, &input).unwrap();
            dot(&out, &upstream)
        };
        let fd_p = grad_central(loss_of_params, params.values(), 1e-6);
        let loss_of_input = |x: &[f64]| {
            let out = mlp_forward(&params, &cfg, x).unwrap();
            dot(&out, &upstream)
        };
        let fd_x = grad_central(loss_of_input, &input, 1e-6);

        let rel_p = max_rel_error(analytic_p.values(), &fd_p, 1e-3);
        let rel_x = max_rel_error(&analytic_x, &fd_x, 1e-3);
        worst = worst.max(rel_p).max(rel_x);
        assert!(
            rel_p < 1e-4 && rel_x < 1e-4,
            "case {case}: param rel {rel_p:.3e}, input rel {rel_x:.3e}"
        );
    }
    println!("worst relative error over 100 cases: {worst:.3e}");
}
