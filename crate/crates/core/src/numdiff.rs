//! Central finite differences.
//!
//! Used as the gradient oracle in tests and as the Jacobian for the extended
//! Kalman filter; independent of the analytic backward pass by construction.

use crate::matrix::Matrix;

/// Gradient of a scalar function by central differences.
pub fn grad_central(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let orig = xp[i];
        xp[i] = orig + h;
        let fp = f(&xp);
        xp[i] = orig - h;
        let fm = f(&xp);
        xp[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

/// Jacobian of a vector function by central differences (rows = outputs).
pub fn jacobian_central(
    f: impl Fn(&[f64]) -> Vec<f64>,
    x: &[f64],
    h: f64,
) -> Matrix<f64> {
    let n = x.len();
    let mut xp = x.to_vec();
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    for i in 0..n {
        let orig = xp[i];
        xp[i] = orig + h;
        let fp = f(&xp);
        xp[i] = orig - h;
        let fm = f(&xp);
        xp[i] = orig;
        cols.push(
            fp.iter()
                .zip(&fm)
                .map(|(&a, &b)| (a - b) / (2.0 * h))
                .collect(),
        );
    }
    let m = cols[0].len();
    Matrix::from_fn(m, n, |r, c| cols[c][r])
}

/// Largest relative error between two gradient vectors, with an absolute
/// floor so near-zero entries do not dominate.
pub fn max_rel_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| (x - y).abs() / x.abs().max(y.abs()).max(floor))
        .fold(0.0, f64::max)
}
