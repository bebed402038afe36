//! Interpolation paths between target (τ=0) and source (τ=1).

use serde::{Deserialize, Serialize};

use seqflow_core::{CoreError, Scalar};

use crate::error::{FlowError, Result};

/// Path coefficients `α(τ)`, `σ(τ)`: the interpolant is
/// `x(τ) = α(τ)·x0 + σ(τ)·x1` with `x0` the target and `x1` the source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlowPath {
    /// `α(τ) = 1 − τ`, `σ(τ) = τ`.
    Straight,
}

impl FlowPath {
    pub fn id(&self) -> &'static str {
        match self {
            FlowPath::Straight => "straight",
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "straight" => Ok(FlowPath::Straight),
            other => Err(FlowError::Config(format!("unknown flow path '{other}'"))),
        }
    }

    #[inline]
    pub fn alpha<S: Scalar>(&self, tau: S) -> S {
        match self {
            FlowPath::Straight => S::one() - tau,
        }
    }

    #[inline]
    pub fn sigma<S: Scalar>(&self, tau: S) -> S {
        match self {
            FlowPath::Straight => tau,
        }
    }

    #[inline]
    pub fn dalpha<S: Scalar>(&self, _tau: S) -> S {
        match self {
            FlowPath::Straight => -S::one(),
        }
    }

    #[inline]
    pub fn dsigma<S: Scalar>(&self, _tau: S) -> S {
        match self {
            FlowPath::Straight => S::one(),
        }
    }
}

/// Point and velocity of the interpolant:
/// `x(τ) = α·x0 + σ·x1`, `ẋ(τ) = α̇·x0 + σ̇·x1`.
pub fn interpolate<S: Scalar>(
    path: FlowPath,
    x0: &[S],
    x1: &[S],
    tau: S,
) -> Result<(Vec<S>, Vec<S>)> {
    if x0.len() != x1.len() {
        return Err(FlowError::Core(CoreError::DimensionMismatch {
            context: "interpolate",
            expected: x0.len(),
            actual: x1.len(),
        }));
    }
    let t = tau.to_f64_lossy();
    if !(0.0..=1.0).contains(&t) {
        return Err(FlowError::Config(format!(
            "interpolation time must be in [0, 1], got {t}"
        )));
    }
    let (a, s) = (path.alpha(tau), path.sigma(tau));
    let (da, ds) = (path.dalpha(tau), path.dsigma(tau));
    let x_tau = x0
        .iter()
        .zip(x1)
        .map(|(&p, &q)| a * p + s * q)
        .collect();
    let dx_tau = x0
        .iter()
        .zip(x1)
        .map(|(&p, &q)| da * p + ds * q)
        .collect();
    Ok((x_tau, dx_tau))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn straight_path_boundary_values() {
        let p = FlowPath::Straight;
        assert_eq!(p.alpha(0.0f64), 1.0);
        assert_eq!(p.sigma(0.0f64), 0.0);
        assert_eq!(p.alpha(1.0f64), 0.0);
        assert_eq!(p.sigma(1.0f64), 1.0);
    }

    #[test]
    fn endpoints_return_inputs_exactly() {
        let x0 = [1.5f64, -2.0, 0.25];
        let x1 = [0.5f64, 4.0, -1.0];
        let (at0, d0) = interpolate(FlowPath::Straight, &x0, &x1, 0.0).unwrap();
        assert_eq!(at0, x0.to_vec());
        let (at1, d1) = interpolate(FlowPath::Straight, &x0, &x1, 1.0).unwrap();
        assert_eq!(at1, x1.to_vec());
        // velocity is x1 − x0 everywhere on the straight path
        for i in 0..3 {
            assert_eq!(d0[i], x1[i] - x0[i]);
            assert_eq!(d1[i], x1[i] - x0[i]);
        }
    }

    #[test]
    fn quarter_point_hand_values() {
        let (x, dx) =
            interpolate(FlowPath::Straight, &[0.0, 0.0], &[2.0, 4.0], 0.25f64).unwrap();
        assert_eq!(x, vec![0.5, 1.0]);
        assert_eq!(dx, vec![2.0, 4.0]);
    }

    #[test]
    fn dimension_and_range_errors() {
        assert!(interpolate(FlowPath::Straight, &[0.0], &[1.0, 2.0], 0.5f64).is_err());
        assert!(interpolate(FlowPath::Straight, &[0.0], &[1.0], 1.5f64).is_err());
    }

    #[test]
    fn path_id_round_trip() {
        assert_eq!(
            FlowPath::from_id(FlowPath::Straight.id()).unwrap(),
            FlowPath::Straight
        );
        assert!(FlowPath::from_id("curved").is_err());
    }
}
