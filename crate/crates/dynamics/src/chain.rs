//! Scalar linear-Gaussian chain `x' = a·x + q·ε`, observed as `z = x + r·η`.
//! The fully deterministic variant (q = r = 0) is the exactness benchmark for
//! one-step sequential sampling; the noisy variant feeds filter sanity tests.

use rand::Rng;
use seqflow_core::rng::normal;

#[derive(Debug, Clone, Copy)]
pub struct LinearChain {
    pub coeff: f64,
    pub q: f64,
    pub r: f64,
}

impl Default for LinearChain {
    fn default() -> Self {
        Self {
            coeff: 0.9,
            q: 0.0,
            r: 0.0,
        }
    }
}

impl LinearChain {
    pub fn initial_state(&self, rng: &mut impl Rng) -> f64 {
        normal::<f64>(rng)
    }

    pub fn step(&self, x: f64, rng: &mut impl Rng) -> f64 {
        let mut next = self.coeff * x;
        if self.q > 0.0 {
            next += self.q * normal::<f64>(rng);
        }
        next
    }

    pub fn observe(&self, x: f64, rng: &mut impl Rng) -> f64 {
        if self.r > 0.0 {
            x + self.r * normal::<f64>(rng)
        } else {
            x
        }
    }
}
