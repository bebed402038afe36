//! Lorenz attractor as a discrete nonlinear state-space model:
//! `s' = F(s)·s + w` with `F(s) = exp(A(s)·Δ)` and a rotated, noisy
//! observation `z = R·s + η`.

use rand::Rng;
use seqflow_core::linalg::expm;
use seqflow_core::rng::normal_vec;
use seqflow_core::Matrix64;

use crate::error::{DynError, Result};
use crate::noise::NoiseLevel;

pub const LORENZ_DIM: usize = 3;

#[derive(Debug, Clone)]
pub struct LorenzSystem {
    /// Integration interval Δ.
    pub delta: f64,
    /// Process-noise std; fixed to r/10 at construction.
    pub q: f64,
    /// Observation-noise std.
    pub r: f64,
    /// Observation map: a proper rotation.
    pub rotation: Matrix64,
}

impl LorenzSystem {
    pub const DEFAULT_DELTA: f64 = 0.02;

    /// Build from a measurement-uncertainty level; enforces `q = r/10`.
    pub fn new(delta: f64, noise: NoiseLevel) -> Result<Self> {
        Self::with_observation_noise(delta, noise.r())
    }

    pub fn with_observation_noise(delta: f64, r: f64) -> Result<Self> {
        if delta < 0.0 || !delta.is_finite() {
            return Err(DynError::InvalidConfig(format!("delta must be >= 0, got {delta}")));
        }
        if r < 0.0 || !r.is_finite() {
            return Err(DynError::InvalidConfig(format!("r must be >= 0, got {r}")));
        }
        let rotation = default_rotation();
        debug_assert!(orthogonality_defect(&rotation) < 1e-10);
        Ok(Self {
            delta,
            q: r / 10.0,
            r,
            rotation,
        })
    }

    /// State-dependent generator matrix of the Lorenz-63 flow.
    pub fn generator(s1: f64) -> Matrix64 {
        Matrix64::from_vec(
            3,
            3,
            vec![
                -10.0, 10.0, 0.0, //
                28.0, -1.0, -s1, //
                0.0, s1, -8.0 / 3.0,
            ],
        )
        .expect("constant entries")
    }

    /// `F(s) = exp(A(s)·Δ)`.
    pub fn transition_matrix(&self, s: &[f64]) -> Matrix64 {
        let a = Self::generator(s[0]).scale(self.delta);
        expm(&a).expect("finite generator")
    }

    /// Deterministic part of one step: `F(s)·s`.
    pub fn step_deterministic(&self, s: &[f64]) -> Vec<f64> {
        self.transition_matrix(s).matvec(s)
    }

    /// One stochastic step: `F(s)·s + w`, `w ~ N(0, q²I)`.
    pub fn step(&self, s: &[f64], rng: &mut impl Rng) -> Vec<f64> {
        let mut next = self.step_deterministic(s);
        if self.q > 0.0 {
            let w: Vec<f64> = normal_vec(rng, LORENZ_DIM);
            for (x, n) in next.iter_mut().zip(w) {
                *x += self.q * n;
            }
        }
        next
    }

    /// Observation `z = R·s + η`, `η ~ N(0, r²I)`.
    pub fn observe(&self, s: &[f64], rng: &mut impl Rng) -> Vec<f64> {
        let mut z = self.rotation.matvec(s);
        if self.r > 0.0 {
            let eta: Vec<f64> = normal_vec(rng, LORENZ_DIM);
            for (x, n) in z.iter_mut().zip(eta) {
                *x += self.r * n;
            }
        }
        z
    }

    /// Burn in from a perturbed canonical start so trajectories begin on the
    /// attractor.
    pub fn initial_state(&self, rng: &mut impl Rng, burn_in: usize) -> Vec<f64> {
        let noise: Vec<f64> = normal_vec(rng, LORENZ_DIM);
        let mut s = vec![1.0 + noise[0], 1.0 + noise[1], 1.0 + noise[2]];
        for _ in 0..burn_in {
            s = self.step(&s, rng);
        }
        s
    }
}

/// Rotation about z, then y, then x, each by `angle_deg` degrees.
pub fn rotation_zyx(angle_deg: f64) -> Matrix64 {
    let a = angle_deg.to_radians();
    let (s, c) = a.sin_cos();
    let rz = Matrix64::from_vec(3, 3, vec![c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0]).unwrap();
    let ry = Matrix64::from_vec(3, 3, vec![c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c]).unwrap();
    let rx = Matrix64::from_vec(3, 3, vec![1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c]).unwrap();
    rz.matmul(&ry).matmul(&rx)
}

/// The fixed observation rotation: 10° about each axis.
pub fn default_rotation() -> Matrix64 {
    rotation_zyx(10.0)
}

/// `max |RᵀR − I|`.
pub fn orthogonality_defect(r: &Matrix64) -> f64 {
    let gram = r.transpose().matmul(r);
    gram.sub(&Matrix64::identity(3)).max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use seqflow_core::rng::substream;

    /// Plain truncated Taylor series, no scaling-and-squaring.
    fn series_expm(a: &Matrix64, terms: usize) -> Matrix64 {
        let mut result = Matrix64::identity(3);
        let mut term = Matrix64::identity(3);
        for k in 1..=terms {
            term = term.matmul(a).scale(1.0 / k as f64);
            result = result.add(&term);
        }
        result
    }

    #[test]
    fn zero_delta_is_identity() {
        let sys = LorenzSystem::with_observation_noise(0.0, 1.0).unwrap();
        let f = sys.transition_matrix(&[5.0, -3.0, 2.0]);
        assert_eq!(f, Matrix64::identity(3));
    }

    #[test]
    fn block_structure_at_s1_zero() {
        // with s1 = 0 the third coordinate decouples: F(3,1)=F(3,2)=F(1,3)=F(2,3)=0
        let sys = LorenzSystem::with_observation_noise(0.005, 1.0).unwrap();
        let f = sys.transition_matrix(&[0.0, 7.0, -2.0]);
        assert!(f.get(2, 0).abs() < 1e-14);
        assert!(f.get(2, 1).abs() < 1e-14);
        assert!(f.get(0, 2).abs() < 1e-14);
        assert!(f.get(1, 2).abs() < 1e-14);
    }

    #[test]
    fn transition_matches_series_oracle() {
        let sys = LorenzSystem::with_observation_noise(0.02, 1.0).unwrap();
        let s = [1.0, 0.0, 0.0];
        let fast = sys.transition_matrix(&s);
        let oracle = series_expm(&LorenzSystem::generator(s[0]).scale(sys.delta), 30);
        for i in 0..9 {
            assert!(
                (fast.data()[i] - oracle.data()[i]).abs() < 1e-10,
                "entry {i}: {} vs {}",
                fast.data()[i],
                oracle.data()[i]
            );
        }
    }

    #[test]
    fn origin_is_fixed_point_without_noise() {
        let sys = LorenzSystem::with_observation_noise(0.02, 0.0).unwrap();
        let mut rng = substream(0, "t", 0);
        let next = sys.step(&[0.0, 0.0, 0.0], &mut rng);
        assert_eq!(next, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn single_step_equals_oracle() {
        let sys = LorenzSystem::with_observation_noise(0.02, 0.0).unwrap();
        let s0 = [1.0, 1.0, 1.0];
        let mut rng = substream(0, "t", 0);
        let stepped = sys.step(&s0, &mut rng);
        let oracle = series_expm(&LorenzSystem::generator(s0[0]).scale(sys.delta), 30)
            .matvec(&s0);
        for i in 0..3 {
            assert!((stepped[i] - oracle[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn trajectory_stays_bounded() {
        let sys = LorenzSystem::with_observation_noise(0.02, 0.0).unwrap();
        let mut s = vec![1.0, 1.0, 1.0];
        let mut rng = substream(0, "t", 0);
        for step in 0..10_000 {
            s = sys.step(&s, &mut rng);
            let max = s.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
            assert!(max < 60.0, "diverged at step {step}: {s:?}");
        }
    }

    #[test]
    fn rotation_is_proper() {
        let r = default_rotation();
        assert!(orthogonality_defect(&r) < 1e-10);
        // det = +1 via triple product of columns
        let c = |j: usize| [r.get(0, j), r.get(1, j), r.get(2, j)];
        let (a, b, cc) = (c(0), c(1), c(2));
        let det = a[0] * (b[1] * cc[2] - b[2] * cc[1]) - a[1] * (b[0] * cc[2] - b[2] * cc[0])
            + a[2] * (b[0] * cc[1] - b[1] * cc[0]);
        assert!((det - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noiseless_observation_preserves_norm() {
        let sys = LorenzSystem::with_observation_noise(0.02, 0.0).unwrap();
        let s = [3.0, -4.0, 12.0];
        let mut rng = substream(0, "t", 0);
        let z = sys.observe(&s, &mut rng);
        let ns: f64 = s.iter().map(|v| v * v).sum::<f64>().sqrt();
        let nz: f64 = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((ns - nz).abs() < 1e-12);
        // and R^T z recovers s
        let back = sys.rotation.transpose().matvec(&z);
        for i in 0..3 {
            assert!((back[i] - s[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn observation_noise_moment_check() {
        // 1/r² = 0 dB → r = 1; std of z − Rs within [0.99, 1.01] over 1e5 draws
        let sys = LorenzSystem::new(0.02, NoiseLevel::from_db(0.0)).unwrap();
        let s = [1.0, 2.0, 3.0];
        let clean = sys.rotation.matvec(&s);
        let mut rng = substream(9, "obs", 0);
        let n = 100_000;
        let mut sums = [0.0f64; 3];
        let mut sq = [0.0f64; 3];
        for _ in 0..n {
            let z = sys.observe(&s, &mut rng);
            for i in 0..3 {
                let d = z[i] - clean[i];
                sums[i] += d;
                sq[i] += d * d;
            }
        }
        for i in 0..3 {
            let mean = sums[i] / n as f64;
            let std = (sq[i] / n as f64 - mean * mean).sqrt();
            assert!(std > 0.99 && std < 1.01, "coordinate {i}: std {std}");
        }
    }
}
