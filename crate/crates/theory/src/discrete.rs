//! Discrete couplings on scalar supports and the one-step pushforward.
//!
//! The one-step rule maps every source atom `x1` to the conditional mean
//! `E[x0 | x1]`; the resulting atom set is compared against the `x0` marginal
//! with exact 1-D optimal transport on weighted supports.

use rand::Rng;
use seqflow_core::rng::{normal, uniform01};
use seqflow_core::Matrix64;

use crate::error::{Result, TheoryError};

pub const JOINT_CAP: usize = 64;

/// Joint distribution of `(x0, x1)` on a product support.
#[derive(Debug, Clone)]
pub struct DiscreteJoint {
    pub x0_support: Vec<f64>,
    pub x1_support: Vec<f64>,
    /// `probs[i][j] = P(x0 = x0_i, x1 = x1_j)`.
    pub probs: Matrix64,
}

/// Weighted atoms of a scalar distribution.
#[derive(Debug, Clone)]
pub struct Discrete1 {
    pub atoms: Vec<(f64, f64)>,
}

impl Discrete1 {
    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|&(v, p)| v * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.atoms.iter().map(|&(v, p)| p * (v - m) * (v - m)).sum()
    }
}

impl DiscreteJoint {
    pub fn new(x0_support: Vec<f64>, x1_support: Vec<f64>, probs: Matrix64) -> Result<Self> {
        let (n0, n1) = (x0_support.len(), x1_support.len());
        if n0 == 0 || n1 == 0 || n0 > JOINT_CAP || n1 > JOINT_CAP {
            return Err(TheoryError::InvalidInput(format!(
                "support sizes must be in 1..={JOINT_CAP}, got {n0}x{n1}"
            )));
        }
        if probs.rows() != n0 || probs.cols() != n1 {
            return Err(TheoryError::InvalidInput(format!(
                "probability table is {}x{}, support is {n0}x{n1}",
                probs.rows(),
                probs.cols()
            )));
        }
        if probs.data().iter().any(|&p| p < 0.0) {
            return Err(TheoryError::InvalidInput("negative probability".into()));
        }
        let total: f64 = probs.data().iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(TheoryError::InvalidInput(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self {
            x0_support,
            x1_support,
            probs,
        })
    }

    /// Product coupling of two marginals.
    pub fn independent(px0: &Discrete1, px1: &Discrete1) -> Result<Self> {
        let x0: Vec<f64> = px0.atoms.iter().map(|&(v, _)| v).collect();
        let x1: Vec<f64> = px1.atoms.iter().map(|&(v, _)| v).collect();
        let probs = Matrix64::from_fn(x0.len(), x1.len(), |i, j| {
            px0.atoms[i].1 * px1.atoms[j].1
        });
        Self::new(x0, x1, probs)
    }

    /// Random joint: normal supports, iid uniform weights normalized to 1.
    pub fn random(n0: usize, n1: usize, rng: &mut impl Rng) -> Result<Self> {
        let x0: Vec<f64> = (0..n0).map(|_| normal::<f64>(rng)).collect();
        let x1: Vec<f64> = (0..n1).map(|_| normal::<f64>(rng)).collect();
        let mut raw: Vec<f64> = (0..n0 * n1)
            .map(|_| uniform01::<f64>(rng) + 1e-3)
            .collect();
        let total: f64 = raw.iter().sum();
        for p in &mut raw {
            *p /= total;
        }
        // renormalize the largest entry so the sum is exactly 1 - ish
        let sum_after: f64 = raw.iter().sum();
        raw[0] += 1.0 - sum_after;
        Self::new(x0, x1, Matrix64::from_vec(n0, n1, raw)?)
    }

    /// Random product coupling (for tightness checks).
    pub fn random_independent(n0: usize, n1: usize, rng: &mut impl Rng) -> Result<Self> {
        let p0 = random_marginal(n0, rng);
        let p1 = random_marginal(n1, rng);
        Self::independent(&p0, &p1)
    }

    pub fn marginal_x0(&self) -> Discrete1 {
        let atoms = self
            .x0_support
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, self.probs.row(i).iter().sum()))
            .collect();
        Discrete1 { atoms }
    }

    pub fn marginal_x1(&self) -> Discrete1 {
        let atoms = self
            .x1_support
            .iter()
            .enumerate()
            .map(|(j, &v)| {
                let p = (0..self.x0_support.len())
                    .map(|i| self.probs.get(i, j))
                    .sum();
                (v, p)
            })
            .collect();
        Discrete1 { atoms }
    }

    /// `E[Var(x0 | x1)]` — the one-step error bound for this coupling.
    pub fn expected_conditional_variance(&self) -> f64 {
        let mut total = 0.0;
        for j in 0..self.x1_support.len() {
            let pj: f64 = (0..self.x0_support.len())
                .map(|i| self.probs.get(i, j))
                .sum();
            if pj <= 0.0 {
                continue;
            }
            let mean: f64 = (0..self.x0_support.len())
                .map(|i| self.x0_support[i] * self.probs.get(i, j))
                .sum::<f64>()
                / pj;
            let var: f64 = (0..self.x0_support.len())
                .map(|i| {
                    let d = self.x0_support[i] - mean;
                    self.probs.get(i, j) * d * d
                })
                .sum::<f64>()
                / pj;
            total += pj * var;
        }
        total
    }
}

fn random_marginal(n: usize, rng: &mut impl Rng) -> Discrete1 {
    let mut atoms: Vec<(f64, f64)> = (0..n)
        .map(|_| (normal::<f64>(rng), uniform01::<f64>(rng) + 1e-3))
        .collect();
    let total: f64 = atoms.iter().map(|&(_, p)| p).sum();
    for a in &mut atoms {
        a.1 /= total;
    }
    let sum_after: f64 = atoms.iter().map(|&(_, p)| p).sum();
    atoms[0].1 += 1.0 - sum_after;
    Discrete1 { atoms }
}

/// Distribution of the one-step sample: an atom `E[x0 | x1]` with mass
/// `P(x1)` per source atom; zero-mass source atoms are skipped.
pub fn one_step_pushforward(joint: &DiscreteJoint) -> Discrete1 {
    let n0 = joint.x0_support.len();
    let mut atoms = Vec::new();
    for j in 0..joint.x1_support.len() {
        let pj: f64 = (0..n0).map(|i| joint.probs.get(i, j)).sum();
        if pj <= 0.0 {
            continue;
        }
        let mean: f64 = (0..n0)
            .map(|i| joint.x0_support[i] * joint.probs.get(i, j))
            .sum::<f64>()
            / pj;
        atoms.push((mean, pj));
    }
    Discrete1 { atoms }
}

/// Exact squared 2-Wasserstein distance between weighted scalar atom sets via
/// the quantile (CDF inverse) coupling.
pub fn w2_sq_discrete_1d(p: &Discrete1, q: &Discrete1) -> f64 {
    let sorted = |d: &Discrete1| {
        let mut a = d.atoms.clone();
        a.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite support"));
        a
    };
    let pa = sorted(p);
    let qa = sorted(q);
    let mut i = 0;
    let mut j = 0;
    let mut mp = pa[0].1;
    let mut mq = qa[0].1;
    let mut cost = 0.0;
    loop {
        let m = mp.min(mq);
        if m > 0.0 {
            let d = pa[i].0 - qa[j].0;
            cost += m * d * d;
        }
        mp -= m;
        mq -= m;
        if mp <= 1e-15 {
            i += 1;
            if i >= pa.len() {
                break;
            }
            mp = pa[i].1;
        }
        if mq <= 1e-15 {
            j += 1;
            if j >= qa.len() {
                break;
            }
            mq = qa[j].1;
        }
    }
    cost.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use seqflow_core::rng::substream;

    #[test]
    fn pushforward_of_deterministic_joint_is_marginal() {
        // x0 = f(x1): each x1 column has mass on exactly one x0 row
        let probs = Matrix64::from_vec(2, 2, vec![0.3, 0.0, 0.0, 0.7]).unwrap();
        let joint = DiscreteJoint::new(vec![-1.0, 2.0], vec![0.0, 1.0], probs).unwrap();
        let push = one_step_pushforward(&joint);
        let marg = joint.marginal_x0();
        assert!(w2_sq_discrete_1d(&push, &marg) < 1e-15);
    }

    #[test]
    fn pushforward_of_independent_is_point_mass_with_variance_gap() {
        let p0 = Discrete1 {
            atoms: vec![(-1.0, 0.25), (0.0, 0.5), (3.0, 0.25)],
        };
        let p1 = Discrete1 {
            atoms: vec![(0.0, 0.5), (1.0, 0.5)],
        };
        let joint = DiscreteJoint::independent(&p0, &p1).unwrap();
        let push = one_step_pushforward(&joint);
        // all atoms collapse to E[x0]
        for &(v, _) in &push.atoms {
            assert!((v - p0.mean()).abs() < 1e-14);
        }
        let w2sq = w2_sq_discrete_1d(&push, &joint.marginal_x0());
        assert!((w2sq - p0.variance()).abs() < 1e-12);
    }

    #[test]
    fn two_by_two_example_hand_computed() {
        // P = [[0.4, 0.1], [0.1, 0.4]] on x0, x1 in {0, 1}
        let probs = Matrix64::from_vec(2, 2, vec![0.4, 0.1, 0.1, 0.4]).unwrap();
        let joint = DiscreteJoint::new(vec![0.0, 1.0], vec![0.0, 1.0], probs).unwrap();
        let push = one_step_pushforward(&joint);
        assert!((push.atoms[0].0 - 0.2).abs() < 1e-15);
        assert!((push.atoms[1].0 - 0.8).abs() < 1e-15);

        let w2sq = w2_sq_discrete_1d(&push, &joint.marginal_x0());
        // sorted coupling: 0 -> 0.2 and 1 -> 0.8, each with mass 0.5
        assert!((w2sq - 0.04).abs() < 1e-14);
        let bound = joint.expected_conditional_variance();
        assert!((bound - 0.16).abs() < 1e-14);
        assert!(w2sq <= bound + 1e-12);
    }

    #[test]
    fn rejects_bad_probabilities() {
        let probs = Matrix64::from_vec(1, 2, vec![0.6, 0.6]).unwrap();
        assert!(DiscreteJoint::new(vec![0.0], vec![0.0, 1.0], probs).is_err());
        let probs = Matrix64::from_vec(1, 2, vec![1.5, -0.5]).unwrap();
        assert!(DiscreteJoint::new(vec![0.0], vec![0.0, 1.0], probs).is_err());
    }

    #[test]
    fn random_joints_are_valid() {
        let mut rng = substream(0, "joint", 0);
        for _ in 0..10 {
            let j = DiscreteJoint::random(5, 7, &mut rng).unwrap();
            let total: f64 = j.probs.data().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
    }
}
