//! One-step sampling error under the two source couplings, in closed form on
//! Gaussian chains and empirically from samples.
//!
//! Under the independent Gaussian source, the one-step sample collapses to
//! the marginal mean and the squared error equals the total variance. Under
//! the temporal coupling, the one-step sample is the conditional mean
//! `A·x_prev + b`; its squared error is bounded by the expected conditional
//! variance `tr(Q)`, and the squared-error gap equals the variance of the
//! conditional mean (law of total variance).

use rand::Rng;
use seqflow_core::Matrix64;
use serde::Serialize;

use seqflow_metrics::{w2_1d, w2_exact_small, w2_gaussian};

use crate::error::Result;
use crate::gaussian::GaussianChain;

#[derive(Debug, Clone, Serialize)]
pub struct Prop1Closed {
    /// W2 between the one-step pushforward under the independent Gaussian
    /// source and the target (= sqrt of total variance).
    pub w2_gaussian_coupling: f64,
    /// W2 between the one-step pushforward under the temporal coupling and
    /// the target.
    pub w2_bayes_coupling: f64,
    /// sqrt of the expected conditional variance `tr(Q)`.
    pub bayes_bound: f64,
    /// Squared-error gap: `w2_gaussian_coupling² − bayes_bound²`.
    pub gap: f64,
    /// `Var E[x_next | x_prev] = tr(A Σ_prev Aᵀ)`; equals `gap` by the law of
    /// total variance.
    pub lotv_gap: f64,
}

pub fn prop1_gaussian_report(chain: &GaussianChain) -> Result<Prop1Closed> {
    let total_var = chain.marginal_cov().trace();
    let w2_gaussian_coupling = total_var.sqrt();

    // pushforward under temporal coupling: N(marginal mean, A Σ Aᵀ)
    let w2_bayes_coupling = w2_gaussian(
        chain.marginal_mean(),
        chain.pushforward_cov(),
        chain.marginal_mean(),
        chain.marginal_cov(),
    )?;

    let bound_sq = chain.q.trace();
    let bayes_bound = bound_sq.max(0.0).sqrt();
    let lotv_gap = chain.pushforward_cov().trace();

    Ok(Prop1Closed {
        w2_gaussian_coupling,
        w2_bayes_coupling,
        bayes_bound,
        gap: total_var - bound_sq,
        lotv_gap,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Prop1Empirical {
    pub closed: Prop1Closed,
    pub emp_w2_gaussian: f64,
    pub emp_w2_bayes: f64,
    /// Bound check on squared values with a block-resampled standard error:
    /// `emp_W2²_bayes ≤ bound² + 3·se`.
    pub bound_satisfied: bool,
    pub n_samples: usize,
}

pub fn prop1_empirical_check(
    chain: &GaussianChain,
    n_samples: usize,
    rng: &mut impl Rng,
) -> Result<Prop1Empirical> {
    let closed = prop1_gaussian_report(chain)?;
    let d = chain.dim();

    // one-step outputs under each coupling
    let gaussian_preds: Vec<Vec<f64>> = (0..n_samples)
        .map(|_| chain.marginal_mean().to_vec())
        .collect();
    let bayes_preds: Vec<Vec<f64>> = (0..n_samples)
        .map(|_| chain.conditional_mean(&chain.sample_prev(rng)))
        .collect();
    let targets_a: Vec<Vec<f64>> = (0..n_samples).map(|_| chain.sample_joint(rng).1).collect();
    let targets_b: Vec<Vec<f64>> = (0..n_samples).map(|_| chain.sample_joint(rng).1).collect();

    let w2_of = |a: &[Vec<f64>], b: &[Vec<f64>]| -> Result<f64> {
        if d == 1 {
            let xs: Vec<f64> = a.iter().map(|v| v[0]).collect();
            let ys: Vec<f64> = b.iter().map(|v| v[0]).collect();
            Ok(w2_1d(&xs, &ys)?)
        } else {
            // exact assignment caps the sample count
            let cap = seqflow_metrics::ASSIGNMENT_CAP.min(a.len());
            let ma = seqflow_core::Matrix::from_rows(&a[..cap].to_vec()).expect("rows");
            let mb = seqflow_core::Matrix::from_rows(&b[..cap].to_vec()).expect("rows");
            Ok(w2_exact_small(&ma, &mb)?)
        }
    };

    let emp_w2_gaussian = w2_of(&targets_a, &gaussian_preds)?;
    let emp_w2_bayes = w2_of(&targets_b, &bayes_preds)?;

    // block estimate of W2² spread for the bound check
    let blocks = 10.min(n_samples);
    let block_len = n_samples / blocks;
    let mut block_sq = Vec::with_capacity(blocks);
    for b in 0..blocks {
        let lo = b * block_len;
        let hi = lo + block_len;
        let w = w2_of(&targets_b[lo..hi].to_vec(), &bayes_preds[lo..hi].to_vec())?;
        block_sq.push(w * w);
    }
    let mean_sq: f64 = block_sq.iter().sum::<f64>() / blocks as f64;
    let var_sq: f64 = block_sq
        .iter()
        .map(|v| (v - mean_sq) * (v - mean_sq))
        .sum::<f64>()
        / (blocks as f64 - 1.0).max(1.0);
    let se = (var_sq / blocks as f64).sqrt();
    let bound_sq = closed.bayes_bound * closed.bayes_bound;
    let bound_satisfied = mean_sq <= bound_sq + 3.0 * se + 1e-12;

    Ok(Prop1Empirical {
        closed,
        emp_w2_gaussian,
        emp_w2_bayes,
        bound_satisfied,
        n_samples,
    })
}

/// Closed-form report for a small multivariate chain (sanity surface for the
/// scalar formulas; `w2_gaussian` handles the covariance part).
pub fn prop1_matrix_case(
    cov_prev: Matrix64,
    a: Matrix64,
    q: Matrix64,
) -> Result<Prop1Closed> {
    let d = cov_prev.rows();
    let chain = GaussianChain::new(vec![0.0; d], cov_prev, a, vec![0.0; d], q)?;
    prop1_gaussian_report(&chain)
}

#[cfg(test)]
mod tests {
    use super::*;
    use seqflow_core::rng::substream;

    #[test]
    fn rho_09_closed_forms() {
        let chain = GaussianChain::unit_ar1(0.9).unwrap();
        let r = prop1_gaussian_report(&chain).unwrap();
        assert!((r.w2_gaussian_coupling - 1.0).abs() < 1e-12);
        assert!((r.w2_bayes_coupling - 0.1).abs() < 1e-10);
        assert!((r.bayes_bound - (1.0f64 - 0.81).sqrt()).abs() < 1e-12);
        assert!((r.gap - 0.81).abs() < 1e-12);
        assert!((r.lotv_gap - 0.81).abs() < 1e-12);
    }

    #[test]
    fn rho_zero_couplings_coincide() {
        let chain = GaussianChain::unit_ar1(0.0).unwrap();
        let r = prop1_gaussian_report(&chain).unwrap();
        assert!((r.w2_bayes_coupling - r.w2_gaussian_coupling).abs() < 1e-12);
        assert!(r.gap.abs() < 1e-12);
        assert!(r.lotv_gap.abs() < 1e-12);
    }

    #[test]
    fn deterministic_dynamics_recover_target_exactly() {
        // Q = 0: one-step sampling is exact
        let chain = GaussianChain::scalar(0.3, 2.0, 0.7, 0.1, 0.0).unwrap();
        let r = prop1_gaussian_report(&chain).unwrap();
        assert!(r.w2_bayes_coupling < 1e-10);
        assert!(r.bayes_bound == 0.0);
    }

    #[test]
    fn strict_ordering_for_informative_chains() {
        for &rho in &[0.1, -0.3, 0.5, 0.95, -0.99] {
            let chain = GaussianChain::unit_ar1(rho).unwrap();
            let r = prop1_gaussian_report(&chain).unwrap();
            assert!(
                r.w2_bayes_coupling < r.w2_gaussian_coupling,
                "rho={rho}: {} !< {}",
                r.w2_bayes_coupling,
                r.w2_gaussian_coupling
            );
        }
    }

    #[test]
    fn empirical_matches_closed_form_quickly() {
        // smaller n than the acceptance run, looser tolerance
        let chain = GaussianChain::unit_ar1(0.9).unwrap();
        let mut rng = substream(1, "emp", 0);
        let r = prop1_empirical_check(&chain, 20_000, &mut rng).unwrap();
        assert!((r.emp_w2_gaussian - 1.0).abs() < 0.05, "{}", r.emp_w2_gaussian);
        assert!((r.emp_w2_bayes - 0.1).abs() < 0.05, "{}", r.emp_w2_bayes);
        assert!(r.bound_satisfied);
    }

    #[test]
    fn matrix_case_traces() {
        let cov = Matrix64::identity(2);
        let a = Matrix64::from_vec(2, 2, vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        let q = Matrix64::from_vec(2, 2, vec![0.75, 0.0, 0.0, 0.75]).unwrap();
        let r = prop1_matrix_case(cov, a, q).unwrap();
        // total variance = 2, bound² = 1.5, lotv gap = 0.5
        assert!((r.w2_gaussian_coupling - 2.0f64.sqrt()).abs() < 1e-12);
        assert!((r.bayes_bound - 1.5f64.sqrt()).abs() < 1e-12);
        assert!((r.lotv_gap - 0.5).abs() < 1e-12);
        assert!((r.gap - 0.5).abs() < 1e-12);
    }
}
