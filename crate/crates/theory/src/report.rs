//! The runnable verification suite, emitted as JSON-lines records.

use rand::Rng;
use serde::Serialize;

use crate::discrete::{one_step_pushforward, w2_sq_discrete_1d, DiscreteJoint};
use crate::error::Result;
use crate::gaussian::GaussianChain;
use crate::lotv::{lotv_exact_discrete, lotv_exact_gaussian};
use crate::prop1::{prop1_empirical_check, prop1_gaussian_report};

#[derive(Debug, Clone, Serialize)]
pub struct TheoryCase {
    pub case: String,
    pub closed_form: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub empirical: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    pub pass: bool,
}

impl TheoryCase {
    pub fn to_jsonl_line(&self) -> String {
        serde_json::to_string(self).expect("plain struct")
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub seed: u64,
    pub n_samples: usize,
    pub n_random_joints: usize,
    pub rho: f64,
    pub rel_tol: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            n_samples: 100_000,
            n_random_joints: 100,
            rho: 0.9,
            rel_tol: 0.02,
        }
    }
}

/// Run every verification case; any `pass = false` entry is a suite failure.
pub fn run_suite(cfg: &SuiteConfig) -> Result<Vec<TheoryCase>> {
    let mut cases = Vec::new();
    let mut rng = seqflow_core::rng::substream(cfg.seed, "theory", 0);

    // closed forms and sampled estimates on the configured chain
    let chain = GaussianChain::unit_ar1(cfg.rho)?;
    let closed = prop1_gaussian_report(&chain)?;
    let emp = prop1_empirical_check(&chain, cfg.n_samples, &mut rng)?;
    let rel = |a: f64, b: f64| {
        if b.abs() < 1e-12 {
            a.abs()
        } else {
            (a - b).abs() / b.abs()
        }
    };
    cases.push(TheoryCase {
        case: format!("gaussian_chain_rho{}_w2_gaussian", cfg.rho),
        closed_form: closed.w2_gaussian_coupling,
        empirical: Some(emp.emp_w2_gaussian),
        bound: None,
        pass: rel(emp.emp_w2_gaussian, closed.w2_gaussian_coupling) < cfg.rel_tol,
    });
    cases.push(TheoryCase {
        case: format!("gaussian_chain_rho{}_w2_bayes", cfg.rho),
        closed_form: closed.w2_bayes_coupling,
        empirical: Some(emp.emp_w2_bayes),
        bound: Some(closed.bayes_bound),
        pass: if closed.w2_bayes_coupling.abs() < 1e-12 {
            emp.emp_w2_bayes < 0.02
        } else {
            rel(emp.emp_w2_bayes, closed.w2_bayes_coupling) < cfg.rel_tol
        },
    });
    cases.push(TheoryCase {
        case: format!("gaussian_chain_rho{}_bound", cfg.rho),
        closed_form: closed.bayes_bound * closed.bayes_bound,
        empirical: Some(emp.emp_w2_bayes * emp.emp_w2_bayes),
        bound: Some(closed.bayes_bound * closed.bayes_bound),
        pass: emp.bound_satisfied,
    });
    cases.push(TheoryCase {
        case: format!("gaussian_chain_rho{}_lotv_identity", cfg.rho),
        closed_form: closed.lotv_gap,
        empirical: Some(closed.gap),
        bound: None,
        pass: (closed.gap - closed.lotv_gap).abs() < 1e-12,
    });

    // the no-information edge: both couplings share the error
    let flat = prop1_gaussian_report(&GaussianChain::unit_ar1(0.0)?)?;
    cases.push(TheoryCase {
        case: "gaussian_chain_rho0_equality".into(),
        closed_form: flat.w2_gaussian_coupling,
        empirical: Some(flat.w2_bayes_coupling),
        bound: None,
        pass: (flat.w2_bayes_coupling - flat.w2_gaussian_coupling).abs() < 1e-12
            && flat.gap.abs() < 1e-12,
    });

    // deterministic dynamics: exact recovery
    let det = prop1_gaussian_report(&GaussianChain::scalar(0.2, 1.5, 0.8, -0.4, 0.0)?)?;
    cases.push(TheoryCase {
        case: "gaussian_chain_q0_exact_recovery".into(),
        closed_form: 0.0,
        empirical: Some(det.w2_bayes_coupling),
        bound: None,
        pass: det.w2_bayes_coupling < 1e-10,
    });

    // strict ordering whenever the previous state is informative
    let ordering_ok = [0.1, -0.25, 0.5, 0.75, -0.9, 0.99].iter().all(|&rho| {
        let r = prop1_gaussian_report(&GaussianChain::unit_ar1(rho).expect("valid rho"))
            .expect("closed form");
        r.w2_bayes_coupling < r.w2_gaussian_coupling
    });
    cases.push(TheoryCase {
        case: "gaussian_chain_strict_ordering".into(),
        closed_form: 0.0,
        empirical: None,
        bound: None,
        pass: ordering_ok,
    });

    // tightness on independent couplings: W2² equals Var(x0) exactly
    let mut tight_worst = 0.0f64;
    for i in 0..cfg.n_random_joints {
        let joint = random_independent_joint(&mut rng, i)?;
        let push = one_step_pushforward(&joint);
        let w2sq = w2_sq_discrete_1d(&push, &joint.marginal_x0());
        let var = joint.marginal_x0().variance();
        tight_worst = tight_worst.max((w2sq - var).abs());
    }
    cases.push(TheoryCase {
        case: format!("lemma1_tightness_{}_independent_joints", cfg.n_random_joints),
        closed_form: 0.0,
        empirical: Some(tight_worst),
        bound: None,
        pass: tight_worst < 1e-12,
    });

    // bound on arbitrary couplings: W2² ≤ E Var(x0|x1)
    let mut bound_worst = f64::NEG_INFINITY;
    for i in 0..cfg.n_random_joints {
        let n0 = 2 + (i % 7);
        let n1 = 2 + (i % 5);
        let joint = DiscreteJoint::random(n0, n1, &mut rng)?;
        let push = one_step_pushforward(&joint);
        let w2sq = w2_sq_discrete_1d(&push, &joint.marginal_x0());
        let bound = joint.expected_conditional_variance();
        bound_worst = bound_worst.max(w2sq - bound);
    }
    cases.push(TheoryCase {
        case: format!("lemma1_bound_{}_random_joints", cfg.n_random_joints),
        closed_form: 0.0,
        empirical: Some(bound_worst),
        bound: Some(0.0),
        pass: bound_worst <= 1e-12,
    });

    // law-of-total-variance residuals on exact objects
    let lotv_g = lotv_exact_gaussian(&chain);
    cases.push(TheoryCase {
        case: "lotv_gaussian_exact".into(),
        closed_form: lotv_g.total_var,
        empirical: Some(lotv_g.residual),
        bound: None,
        pass: lotv_g.residual < 1e-10,
    });
    let joint = DiscreteJoint::random(8, 8, &mut rng)?;
    let lotv_d = lotv_exact_discrete(&joint);
    cases.push(TheoryCase {
        case: "lotv_discrete_exact".into(),
        closed_form: lotv_d.total_var,
        empirical: Some(lotv_d.residual),
        bound: None,
        pass: lotv_d.residual < 1e-12,
    });

    Ok(cases)
}

fn random_independent_joint(rng: &mut impl Rng, i: usize) -> Result<DiscreteJoint> {
    let n0 = 2 + (i % 9);
    let n1 = 2 + (i % 6);
    DiscreteJoint::random_independent(n0, n1, rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_passes() {
        let cfg = SuiteConfig {
            n_samples: 20_000,
            n_random_joints: 20,
            rel_tol: 0.05,
            ..Default::default()
        };
        let cases = run_suite(&cfg).unwrap();
        for c in &cases {
            assert!(c.pass, "case failed: {}", c.to_jsonl_line());
        }
        assert!(cases.len() >= 10);
    }
}
