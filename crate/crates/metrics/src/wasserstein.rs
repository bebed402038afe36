//! 2-Wasserstein estimators: sorted quantile coupling in 1-D, exact optimal
//! assignment for small point sets, and the Gaussian (Bures) closed form.
//! No approximate OT — anything beyond the assignment cap is an error.

use seqflow_core::linalg::{eigen_symmetric, sqrtm_spd, symmetrize};
use seqflow_core::{Matrix, Scalar};

use crate::error::{MetricsError, Result};

/// Hard cap for the cubic-time assignment solver.
pub const ASSIGNMENT_CAP: usize = 512;

/// Exact 1-D W2 between equal-sized empirical distributions via the sorted
/// (quantile) coupling, which is optimal in one dimension.
pub fn w2_1d<S: Scalar>(a: &[S], b: &[S]) -> Result<f64> {
    if a.len() != b.len() || a.is_empty() {
        return Err(MetricsError::ShapeMismatch {
            context: "w2_1d",
            lhs: a.len(),
            rhs: b.len(),
        });
    }
    let mut xs: Vec<f64> = a.iter().map(|v| v.to_f64_lossy()).collect();
    let mut ys: Vec<f64> = b.iter().map(|v| v.to_f64_lossy()).collect();
    xs.sort_by(|p, q| p.partial_cmp(q).expect("finite samples"));
    ys.sort_by(|p, q| p.partial_cmp(q).expect("finite samples"));
    let sum: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum();
    Ok((sum / xs.len() as f64).sqrt())
}

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian
/// algorithm with potentials, shortest augmenting paths, O(n³)).
///
/// Returns the column assigned to each row and the total cost.
pub fn min_cost_assignment(cost: &Matrix<f64>) -> (Vec<usize>, f64) {
    let n = cost.rows();
    assert_eq!(n, cost.cols(), "assignment needs a square cost matrix");
    const INF: f64 = f64::INFINITY;

    // 1-based arrays; p[j] = row matched to column j
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost.get(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![0usize; n];
    let mut total = 0.0;
    for j in 1..=n {
        assignment[p[j] - 1] = j - 1;
        total += cost.get(p[j] - 1, j - 1);
    }
    (assignment, total)
}

/// Exact W2 between two equal-sized point sets (rows are points) via optimal
/// assignment on squared Euclidean cost. `n` is capped at [`ASSIGNMENT_CAP`].
pub fn w2_exact_small<S: Scalar>(a: &Matrix<S>, b: &Matrix<S>) -> Result<f64> {
    if a.rows() != b.rows() || a.cols() != b.cols() || a.rows() == 0 {
        return Err(MetricsError::ShapeMismatch {
            context: "w2_exact_small",
            lhs: a.rows() * a.cols(),
            rhs: b.rows() * b.cols(),
        });
    }
    let n = a.rows();
    if n > ASSIGNMENT_CAP {
        return Err(MetricsError::TooManyPoints {
            n,
            cap: ASSIGNMENT_CAP,
        });
    }
    let cost = Matrix::from_fn(n, n, |i, j| {
        a.row(i)
            .iter()
            .zip(b.row(j))
            .map(|(&x, &y)| {
                let d = x.to_f64_lossy() - y.to_f64_lossy();
                d * d
            })
            .sum()
    });
    let (_, total) = min_cost_assignment(&cost);
    Ok((total / n as f64).max(0.0).sqrt())
}

/// Closed-form W2 between Gaussians (Bures metric):
/// `W2² = ‖μ1−μ2‖² + tr(Σ1 + Σ2 − 2(Σ2^{1/2} Σ1 Σ2^{1/2})^{1/2})`.
///
/// Covariances may be positive semi-definite (a point mass is a valid
/// degenerate Gaussian); indefinite input is an error.
pub fn w2_gaussian(
    mu1: &[f64],
    cov1: &Matrix<f64>,
    mu2: &[f64],
    cov2: &Matrix<f64>,
) -> Result<f64> {
    let d = mu1.len();
    if mu2.len() != d || cov1.rows() != d || cov1.cols() != d || cov2.rows() != d || cov2.cols() != d
    {
        return Err(MetricsError::ShapeMismatch {
            context: "w2_gaussian",
            lhs: d,
            rhs: mu2.len(),
        });
    }
    check_psd(cov1)?;
    check_psd(cov2)?;

    let mean_sq: f64 = mu1
        .iter()
        .zip(mu2)
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum();

    let s2h = sqrtm_spd(&clamp_psd(cov2)?)?;
    let m = symmetrize(&s2h.matmul(cov1).matmul(&s2h));
    let (values, _) = eigen_symmetric(&m)?;
    let tr_cross: f64 = values.iter().map(|&l| l.max(0.0).sqrt()).sum();

    let w2_sq = mean_sq + cov1.trace() + cov2.trace() - 2.0 * tr_cross;
    Ok(w2_sq.max(0.0).sqrt())
}

fn check_psd(cov: &Matrix<f64>) -> Result<()> {
    let (values, _) = eigen_symmetric(cov)?;
    let scale = values.iter().fold(1.0f64, |a, &v| a.max(v.abs()));
    if values.iter().any(|&l| l < -1e-9 * scale) {
        return Err(MetricsError::InvalidInput(format!(
            "covariance is not positive semi-definite (min eigenvalue {:.3e})",
            values.first().copied().unwrap_or(f64::NAN)
        )));
    }
    Ok(())
}

/// Clamp tiny negative eigenvalues so `sqrtm_spd` accepts borderline input.
fn clamp_psd(cov: &Matrix<f64>) -> Result<Matrix<f64>> {
    let (values, vectors) = eigen_symmetric(cov)?;
    let n = cov.rows();
    let mut out = Matrix::<f64>::zeros(n, n);
    for (k, &l) in values.iter().enumerate() {
        let l = l.max(0.0);
        for r in 0..n {
            for c in 0..n {
                out.set(r, c, out.get(r, c) + l * vectors.get(r, k) * vectors.get(c, k));
            }
        }
    }
    Ok(out)
}
