//! Small dense decompositions: cyclic Jacobi eigensolver for symmetric
//! matrices, Cholesky, SPD square root / solve, and a scaling-and-squaring
//! matrix exponential. All of these operate on matrices of a few dozen rows
//! at most; no attempt is made at blocked or pivoted variants.

use crate::error::{CoreError, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;

/// Eigendecomposition of a symmetric matrix via cyclic Jacobi rotations.
///
/// Returns `(eigenvalues, eigenvectors)` with eigenvectors in columns,
/// so `m = V · diag(λ) · Vᵀ`. Eigenvalues are sorted ascending.
pub fn eigen_symmetric<S: Scalar>(m: &Matrix<S>) -> Result<(Vec<S>, Matrix<S>)> {
    let n = m.rows();
    if m.cols() != n {
        return Err(CoreError::DimensionMismatch {
            context: "eigen_symmetric",
            expected: n,
            actual: m.cols(),
        });
    }
    let mut a = m.clone();
    let mut v = Matrix::<S>::identity(n);
    let tol = S::epsilon() * S::from_f64_lossy(16.0);
    let max_sweeps = 64;

    for _ in 0..max_sweeps {
        let mut off = S::zero();
        for p in 0..n {
            for q in (p + 1)..n {
                off = off + a.get(p, q) * a.get(p, q);
            }
        }
        let scale = a.max_abs().max(S::one());
        if off.sqrt() <= tol * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq.abs() <= tol * scale * S::from_f64_lossy(1e-3) {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (S::from_f64_lossy(2.0) * apq);
                // stable tangent of the rotation angle
                let t = {
                    let sign = if theta >= S::zero() { S::one() } else { -S::one() };
                    sign / (theta.abs() + (theta * theta + S::one()).sqrt())
                };
                let c = S::one() / (t * t + S::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp - s * akq);
                    a.set(k, q, s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk - s * aqk);
                    a.set(q, k, s * apk + c * aqk);
                }
                for k in 0..n {
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, c * vkp - s * vkq);
                    v.set(k, q, s * vkp + c * vkq);
                }
            }
        }
    }

    let mut pairs: Vec<(S, usize)> = (0..n).map(|i| (a.get(i, i), i)).collect();
    pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite eigenvalues"));
    let values: Vec<S> = pairs.iter().map(|&(l, _)| l).collect();
    let vectors = Matrix::from_fn(n, n, |r, c| v.get(r, pairs[c].1));
    Ok((values, vectors))
}

/// Lower-triangular Cholesky factor of an SPD matrix: `m = L · Lᵀ`.
pub fn cholesky<S: Scalar>(m: &Matrix<S>) -> Result<Matrix<S>> {
    let n = m.rows();
    if m.cols() != n {
        return Err(CoreError::DimensionMismatch {
            context: "cholesky",
            expected: n,
            actual: m.cols(),
        });
    }
    let mut l = Matrix::<S>::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = m.get(i, j);
            for k in 0..j {
                sum = sum - l.get(i, k) * l.get(j, k);
            }
            if i == j {
                if sum <= S::zero() {
                    return Err(CoreError::Linalg(format!(
                        "cholesky: matrix not positive definite at pivot {i} (value {})",
                        sum.to_f64_lossy()
                    )));
                }
                l.set(i, j, sum.sqrt());
            } else {
                l.set(i, j, sum / l.get(j, j));
            }
        }
    }
    Ok(l)
}

/// Solve `m · x = b` for SPD `m` via Cholesky forward/back substitution.
pub fn solve_spd<S: Scalar>(m: &Matrix<S>, b: &Matrix<S>) -> Result<Matrix<S>> {
    let l = cholesky(m)?;
    let n = m.rows();
    let k = b.cols();
    let mut y = Matrix::<S>::zeros(n, k);
    for c in 0..k {
        for i in 0..n {
            let mut sum = b.get(i, c);
            for j in 0..i {
                sum = sum - l.get(i, j) * y.get(j, c);
            }
            y.set(i, c, sum / l.get(i, i));
        }
    }
    let mut x = Matrix::<S>::zeros(n, k);
    for c in 0..k {
        for i in (0..n).rev() {
            let mut sum = y.get(i, c);
            for j in (i + 1)..n {
                sum = sum - l.get(j, i) * x.get(j, c);
            }
            x.set(i, c, sum / l.get(i, i));
        }
    }
    Ok(x)
}

/// Symmetric square root of an SPD (or PSD up to `-tol`) matrix.
///
/// Tiny negative eigenvalues from roundoff are clamped to zero; anything
/// beyond the tolerance is an error.
pub fn sqrtm_spd<S: Scalar>(m: &Matrix<S>) -> Result<Matrix<S>> {
    let (values, vectors) = eigen_symmetric(m)?;
    let scale = values
        .iter()
        .fold(S::zero(), |acc, &v| acc.max(v.abs()))
        .max(S::one());
    let tol = scale * S::epsilon().sqrt();
    let n = m.rows();
    let mut out = Matrix::<S>::zeros(n, n);
    for (idx, &lambda) in values.iter().enumerate() {
        if lambda < -tol {
            return Err(CoreError::Linalg(format!(
                "sqrtm_spd: negative eigenvalue {}",
                lambda.to_f64_lossy()
            )));
        }
        let root = lambda.max(S::zero()).sqrt();
        for r in 0..n {
            for c in 0..n {
                let add = root * vectors.get(r, idx) * vectors.get(c, idx);
                out.set(r, c, out.get(r, c) + add);
            }
        }
    }
    Ok(out)
}

/// Matrix exponential by scaling-and-squaring with a truncated Taylor series.
///
/// Accurate to ~1e-12 relative for the small, well-scaled matrices used here.
pub fn expm<S: Scalar>(m: &Matrix<S>) -> Result<Matrix<S>> {
    let n = m.rows();
    if m.cols() != n {
        return Err(CoreError::DimensionMismatch {
            context: "expm",
            expected: n,
            actual: m.cols(),
        });
    }
    // scale so the series argument has max-abs norm below 1/2
    let norm = m.max_abs().to_f64_lossy() * n as f64;
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = m.scale(S::from_f64_lossy(0.5f64.powi(squarings as i32)));

    let mut result = Matrix::<S>::identity(n);
    let mut term = Matrix::<S>::identity(n);
    for k in 1..=24u32 {
        term = term.matmul(&scaled).scale(S::one() / S::from_f64_lossy(k as f64));
        result = result.add(&term);
        if term.max_abs().to_f64_lossy() < 1e-18 {
            break;
        }
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result.validate_finite("expm")?;
    Ok(result)
}

/// Force exact symmetry by averaging with the transpose.
pub fn symmetrize<S: Scalar>(m: &Matrix<S>) -> Matrix<S> {
    let half = S::from_f64_lossy(0.5);
    Matrix::from_fn(m.rows(), m.cols(), |r, c| {
        (m.get(r, c) + m.get(c, r)) * half
    })
}
