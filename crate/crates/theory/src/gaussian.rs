//! Linear-Gaussian two-step chain with analytically known moments:
//! `x_prev ~ N(μ, Σ)` and `x_next | x_prev ~ N(A·x_prev + b, Q)`.

use rand::Rng;
use seqflow_core::linalg::{cholesky, symmetrize};
use seqflow_core::rng::normal_vec;
use seqflow_core::Matrix64;

use crate::error::{Result, TheoryError};

#[derive(Debug, Clone)]
pub struct GaussianChain {
    pub mu_prev: Vec<f64>,
    pub cov_prev: Matrix64,
    pub a: Matrix64,
    pub b: Vec<f64>,
    pub q: Matrix64,
    marginal_mean: Vec<f64>,
    marginal_cov: Matrix64,
    /// `A Σ_prev Aᵀ` — the covariance explained by the previous state.
    pushforward_cov: Matrix64,
    l_prev: Matrix64,
    l_q: Option<Matrix64>,
}

impl GaussianChain {
    pub fn new(
        mu_prev: Vec<f64>,
        cov_prev: Matrix64,
        a: Matrix64,
        b: Vec<f64>,
        q: Matrix64,
    ) -> Result<Self> {
        let d = mu_prev.len();
        if cov_prev.rows() != d
            || a.rows() != d
            || a.cols() != d
            || b.len() != d
            || q.rows() != d
        {
            return Err(TheoryError::InvalidInput(
                "chain pieces must share one dimension".into(),
            ));
        }
        let cov_prev = symmetrize(&cov_prev);
        let q = symmetrize(&q);

        let pushforward_cov = symmetrize(&a.matmul(&cov_prev).matmul(&a.transpose()));
        let marginal_cov = pushforward_cov.add(&q);
        // the total-variance split must be consistent to numerical precision
        let defect = marginal_cov
            .sub(&pushforward_cov.add(&q))
            .max_abs()
            .max(marginal_cov.sub(&symmetrize(&marginal_cov)).max_abs());
        if defect > 1e-12 {
            return Err(TheoryError::InvalidInput(format!(
                "total-variance decomposition defect {defect:.3e}"
            )));
        }
        let marginal_mean: Vec<f64> = a
            .matvec(&mu_prev)
            .iter()
            .zip(&b)
            .map(|(&x, &y)| x + y)
            .collect();

        let l_prev = cholesky(&jitter(&cov_prev))
            .map_err(|e| TheoryError::InvalidInput(format!("cov_prev not PSD: {e}")))?;
        let l_q = if q.max_abs() == 0.0 {
            None
        } else {
            Some(
                cholesky(&jitter(&q))
                    .map_err(|e| TheoryError::InvalidInput(format!("Q not PSD: {e}")))?,
            )
        };

        Ok(Self {
            mu_prev,
            cov_prev,
            a,
            b,
            q,
            marginal_mean,
            marginal_cov,
            pushforward_cov,
            l_prev,
            l_q,
        })
    }

    /// Scalar chain.
    pub fn scalar(mu_prev: f64, var_prev: f64, a: f64, b: f64, q_var: f64) -> Result<Self> {
        Self::new(
            vec![mu_prev],
            Matrix64::from_vec(1, 1, vec![var_prev]).expect("1x1"),
            Matrix64::from_vec(1, 1, vec![a]).expect("1x1"),
            vec![b],
            Matrix64::from_vec(1, 1, vec![q_var]).expect("1x1"),
        )
    }

    /// AR(1) with unit marginal variance: `Σ_prev = 1`, `A = ρ`, `Q = 1 − ρ²`.
    pub fn unit_ar1(rho: f64) -> Result<Self> {
        if rho.abs() > 1.0 {
            return Err(TheoryError::InvalidInput(format!(
                "|rho| must be <= 1, got {rho}"
            )));
        }
        Self::scalar(0.0, 1.0, rho, 0.0, 1.0 - rho * rho)
    }

    pub fn dim(&self) -> usize {
        self.mu_prev.len()
    }

    pub fn marginal_mean(&self) -> &[f64] {
        &self.marginal_mean
    }

    pub fn marginal_cov(&self) -> &Matrix64 {
        &self.marginal_cov
    }

    pub fn pushforward_cov(&self) -> &Matrix64 {
        &self.pushforward_cov
    }

    /// `E[x_next | x_prev] = A·x_prev + b`.
    pub fn conditional_mean(&self, prev: &[f64]) -> Vec<f64> {
        self.a
            .matvec(prev)
            .iter()
            .zip(&self.b)
            .map(|(&x, &y)| x + y)
            .collect()
    }

    pub fn sample_prev(&self, rng: &mut impl Rng) -> Vec<f64> {
        let eps: Vec<f64> = normal_vec(rng, self.dim());
        let mut out = self.l_prev.matvec(&eps);
        for (o, &m) in out.iter_mut().zip(&self.mu_prev) {
            *o += m;
        }
        out
    }

    pub fn sample_next_given(&self, prev: &[f64], rng: &mut impl Rng) -> Vec<f64> {
        let mut out = self.conditional_mean(prev);
        if let Some(lq) = &self.l_q {
            let eps: Vec<f64> = normal_vec(rng, self.dim());
            let noise = lq.matvec(&eps);
            for (o, n) in out.iter_mut().zip(noise) {
                *o += n;
            }
        }
        out
    }

    pub fn sample_joint(&self, rng: &mut impl Rng) -> (Vec<f64>, Vec<f64>) {
        let prev = self.sample_prev(rng);
        let next = self.sample_next_given(&prev, rng);
        (prev, next)
    }
}

/// Tiny diagonal jitter so degenerate (PSD) covariances factor.
fn jitter(m: &Matrix64) -> Matrix64 {
    let scale = m.max_abs().max(1.0);
    let mut out = m.clone();
    for i in 0..m.rows() {
        out.set(i, i, out.get(i, i) + 1e-300 + scale * 1e-15);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use seqflow_core::rng::substream;

    #[test]
    fn unit_ar1_has_unit_marginal() {
        let chain = GaussianChain::unit_ar1(0.9).unwrap();
        assert!((chain.marginal_cov().get(0, 0) - 1.0).abs() < 1e-14);
        assert!((chain.pushforward_cov().get(0, 0) - 0.81).abs() < 1e-14);
        assert_eq!(chain.marginal_mean(), &[0.0]);
    }

    #[test]
    fn sampled_moments_match_closed_form() {
        let chain = GaussianChain::scalar(1.0, 4.0, 0.5, -1.0, 2.0).unwrap();
        let mut rng = substream(0, "chain", 0);
        let n = 200_000;
        let mut sum = 0.0;
        let mut sq = 0.0;
        for _ in 0..n {
            let (_, next) = chain.sample_joint(&mut rng);
            sum += next[0];
            sq += next[0] * next[0];
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        // closed form: mean = 0.5*1 - 1 = -0.5, var = 0.25*4 + 2 = 3
        assert!((mean + 0.5).abs() < 0.02, "mean {mean}");
        assert!((var - 3.0).abs() < 0.05, "var {var}");
    }
}
