//! Point and distributional scores.

use seqflow_core::{Matrix, Scalar};

use crate::error::{MetricsError, Result};

/// Root mean squared elementwise error.
pub fn rmse<S: Scalar>(pred: &[S], truth: &[S]) -> Result<f64> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(MetricsError::ShapeMismatch {
            context: "rmse",
            lhs: pred.len(),
            rhs: truth.len(),
        });
    }
    let sum: f64 = pred
        .iter()
        .zip(truth)
        .map(|(&p, &t)| {
            let d = p.to_f64_lossy() - t.to_f64_lossy();
            d * d
        })
        .sum();
    Ok((sum / pred.len() as f64).sqrt())
}

/// `10·log10(MSE)`. Returns `f64::NEG_INFINITY` when the MSE is exactly zero;
/// callers flag the sentinel in reports.
pub fn log_mse_db<S: Scalar>(pred: &[S], truth: &[S]) -> Result<f64> {
    let r = rmse(pred, truth)?;
    let mse = r * r;
    if mse == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(10.0 * mse.log10())
}

/// Energy score with the L1 ground norm:
/// `E‖x̂−x‖₁ − ½·E_{i≠j}‖x̂_i−x̂_j‖₁`, the second expectation over all
/// `m(m−1)` ordered pairs (unbiased).
pub fn energy_score<S: Scalar>(samples: &Matrix<S>, truth: &[S]) -> Result<f64> {
    let m = samples.rows();
    let d = samples.cols();
    if m < 2 {
        return Err(MetricsError::InvalidInput(format!(
            "energy_score needs at least 2 samples, got {m}"
        )));
    }
    if d != truth.len() {
        return Err(MetricsError::ShapeMismatch {
            context: "energy_score",
            lhs: d,
            rhs: truth.len(),
        });
    }
    let l1 = |a: &[S], b: &[S]| -> f64 {
        a.iter()
            .zip(b)
            .map(|(&x, &y)| (x.to_f64_lossy() - y.to_f64_lossy()).abs())
            .sum()
    };
    let mut to_truth = 0.0;
    for i in 0..m {
        to_truth += l1(samples.row(i), truth);
    }
    to_truth /= m as f64;

    let mut pairwise = 0.0;
    for i in 0..m {
        for j in (i + 1)..m {
            pairwise += l1(samples.row(i), samples.row(j));
        }
    }
    // unordered sum doubled = ordered i != j sum
    pairwise = 2.0 * pairwise / (m * (m - 1)) as f64;

    Ok(to_truth - 0.5 * pairwise)
}

/// RMSE per forecast lead time, aggregated over instances.
///
/// `preds` and `truths` hold one row per instance, each row a flattened
/// horizon of `horizon × state_dim` values.
pub fn lead_time_curve<S: Scalar>(
    preds: &Matrix<S>,
    truths: &Matrix<S>,
    horizon: usize,
) -> Result<Vec<f64>> {
    if preds.rows() != truths.rows() || preds.cols() != truths.cols() {
        return Err(MetricsError::ShapeMismatch {
            context: "lead_time_curve",
            lhs: preds.rows() * preds.cols(),
            rhs: truths.rows() * truths.cols(),
        });
    }
    if horizon == 0 || preds.cols() % horizon != 0 {
        return Err(MetricsError::InvalidInput(format!(
            "lead_time_curve: row length {} not divisible by horizon {horizon}",
            preds.cols()
        )));
    }
    let state_dim = preds.cols() / horizon;
    let mut sums = vec![0.0f64; horizon];
    for r in 0..preds.rows() {
        let p = preds.row(r);
        let t = truths.row(r);
        for h in 0..horizon {
            for k in 0..state_dim {
                let d = p[h * state_dim + k].to_f64_lossy() - t[h * state_dim + k].to_f64_lossy();
                sums[h] += d * d;
            }
        }
    }
    let denom = (preds.rows() * state_dim) as f64;
    Ok(sums.into_iter().map(|s| (s / denom).sqrt()).collect())
}

/// Spearman rank correlation (used to check that lead-time curves grow).
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let rank = |v: &[f64]| -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].partial_cmp(&v[j]).expect("finite"));
        let mut r = vec![0.0; v.len()];
        for (pos, &i) in idx.iter().enumerate() {
            r[i] = pos as f64;
        }
        r
    };
    let ra = rank(a);
    let rb = rank(b);
    let n = a.len() as f64;
    let mean = (n - 1.0) / 2.0;
    let mut num = 0.0;
    let mut da = 0.0;
    let mut db = 0.0;
    for i in 0..a.len() {
        num += (ra[i] - mean) * (rb[i] - mean);
        da += (ra[i] - mean).powi(2);
        db += (rb[i] - mean).powi(2);
    }
    num / (da.sqrt() * db.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rmse_known_values() {
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert!((rmse(&[3.0, 3.0], &[1.0, 1.0]).unwrap() - 2.0).abs() < 1e-15);
        let v = rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap();
        assert!((v - (25.0f64 / 2.0).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn log_mse_db_known_values() {
        assert_eq!(log_mse_db(&[1.0], &[0.0]).unwrap(), 0.0);
        assert!((log_mse_db(&[10.0], &[0.0]).unwrap() - 20.0).abs() < 1e-12);
        assert_eq!(log_mse_db(&[5.0], &[5.0]).unwrap(), f64::NEG_INFINITY);
    }

    #[test]
    fn energy_score_enumerated_cases() {
        // samples {0, 2}, truth 1: E|x̂−x| = 1, E_{i≠j}|x̂_i−x̂_j| = 2 → ES = 0
        let s = Matrix::from_rows(&[vec![0.0], vec![2.0]]).unwrap();
        assert!((energy_score(&s, &[1.0]).unwrap()).abs() < 1e-15);
        // samples {0, 2}, truth 0: first term 1, ES = 0
        assert!((energy_score(&s, &[0.0]).unwrap()).abs() < 1e-15);
        // over-deterministic {1, 1}, truth 0: ES = 1
        let s = Matrix::from_rows(&[vec![1.0], vec![1.0]]).unwrap();
        assert!((energy_score(&s, &[0.0]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn energy_score_zero_when_samples_equal_truth() {
        let s = Matrix::from_rows(&[vec![1.0, -2.0], vec![1.0, -2.0]]).unwrap();
        assert_eq!(energy_score(&s, &[1.0, -2.0]).unwrap(), 0.0);
    }

    #[test]
    fn energy_score_needs_two_samples() {
        let s = Matrix::from_rows(&[vec![1.0]]).unwrap();
        assert!(energy_score(&s, &[1.0]).is_err());
    }

    #[test]
    fn lead_curve_perfect_and_flat() {
        let p = Matrix::from_rows(&[vec![1.0, 2.0, 3.0, 4.0]]).unwrap();
        let c = lead_time_curve(&p, &p, 2).unwrap();
        assert_eq!(c, vec![0.0, 0.0]);

        // constant offset of 0.5 per entry → flat curve at 0.5
        let t = p.map(|v| v + 0.5);
        let c = lead_time_curve(&p, &t, 4).unwrap();
        for v in c {
            assert!((v - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn spearman_monotone() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [10.0, 20.0, 25.0, 100.0];
        assert!((spearman(&a, &b) - 1.0).abs() < 1e-12);
        let c = [4.0, 3.0, 2.0, 1.0];
        assert!((spearman(&a, &c) + 1.0).abs() < 1e-12);
    }
}
