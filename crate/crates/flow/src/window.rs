//! Fixed-length observation windows used as conditioning.

use seqflow_core::Scalar;

/// The last `window_len` observations ending at some time step, flattened
/// oldest-to-newest. Positions before the first real observation are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionWindow<S> {
    data: Vec<S>,
    window_len: usize,
    obs_dim: usize,
}

impl<S: Scalar> ConditionWindow<S> {
    /// Window over `obs` (flat, time-major, `obs_dim` per step) ending at
    /// step `t` inclusive.
    pub fn from_flat(obs: &[S], obs_dim: usize, t: usize, window_len: usize) -> Self {
        debug_assert!(obs.len() % obs_dim == 0);
        debug_assert!((t + 1) * obs_dim <= obs.len());
        let mut data = vec![S::zero(); window_len * obs_dim];
        for k in 0..window_len {
            // time index of slot k, oldest first
            let offset = window_len - 1 - k;
            if offset > t {
                continue; // before the first observation: stays zero
            }
            let ti = t - offset;
            let src = &obs[ti * obs_dim..(ti + 1) * obs_dim];
            data[k * obs_dim..(k + 1) * obs_dim].copy_from_slice(src);
        }
        Self {
            data,
            window_len,
            obs_dim,
        }
    }

    pub fn from_raw(data: Vec<S>, window_len: usize, obs_dim: usize) -> Self {
        assert_eq!(data.len(), window_len * obs_dim);
        Self {
            data,
            window_len,
            obs_dim,
        }
    }

    /// Flattened contents; the length is always `window_len × obs_dim`.
    pub fn data(&self) -> &[S] {
        &self.data
    }

    pub fn window_len(&self) -> usize {
        self.window_len
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn flat_len(&self) -> usize {
        self.data.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pads_exactly_before_first_observation() {
        // obs_dim 2, T = 3, window 4 ending at t = 1: slots [0, 0, z0, z1]
        let obs: Vec<f64> = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let w = ConditionWindow::from_flat(&obs, 2, 1, 4);
        assert_eq!(w.flat_len(), 8);
        assert_eq!(w.data(), &[0.0, 0.0, 0.0, 0.0, 1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn full_window_without_padding() {
        let obs: Vec<f64> = (0..6).map(|v| v as f64).collect();
        let w = ConditionWindow::from_flat(&obs, 2, 2, 2);
        assert_eq!(w.data(), &[2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn window_length_is_invariant() {
        let obs: Vec<f64> = vec![7.0];
        let w = ConditionWindow::from_flat(&obs, 1, 0, 8);
        assert_eq!(w.flat_len(), 8);
        assert_eq!(w.data()[7], 7.0);
        assert!(w.data()[..7].iter().all(|&v| v == 0.0));
    }
}
