//! Metric axioms and oracle comparisons for the Wasserstein estimators.

use proptest::prelude::*;
use seqflow_core::rng::{normal_vec, substream, uniform01};
use seqflow_core::Matrix;
use seqflow_metrics::{energy_score, w2_1d, w2_exact_small, w2_gaussian};

fn random_points(seed: u64, n: usize, d: usize) -> Matrix<f64> {
    let mut rng = substream(seed, "points", 0);
    Matrix::from_rows(
        &(0..n)
            .map(|_| normal_vec::<f64>(&mut rng, d))
            .collect::<Vec<_>>(),
    )
    .unwrap()
}

/// Brute force over all n! pairings.
fn w2_brute_force(a: &Matrix<f64>, b: &Matrix<f64>) -> f64 {
    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 1 {
            return vec![vec![0]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q: Vec<usize> = p.iter().map(|&v| v + 1).collect();
                q.insert(pos, 0);
                out.push(q);
            }
        }
        out
    }
    let n = a.rows();
    let mut best = f64::INFINITY;
    for perm in permutations(n) {
        let mut total = 0.0;
        for (i, &j) in perm.iter().enumerate() {
            total += a
                .row(i)
                .iter()
                .zip(b.row(j))
                .map(|(&x, &y)| (x - y) * (x - y))
                .sum::<f64>();
        }
        best = best.min(total);
    }
    (best / n as f64).sqrt()
}

#[test]
fn assignment_matches_brute_force_up_to_n7() {
    for n in 1..=7 {
        for case in 0..8 {
            let a = random_points(case * 100 + n as u64, n, 2);
            let b = random_points(case * 100 + n as u64 + 50, n, 2);
            let fast = w2_exact_small(&a, &b).unwrap();
            let brute = w2_brute_force(&a, &b);
            assert!(
                (fast - brute).abs() < 1e-9,
                "n={n} case={case}: {fast} vs {brute}"
            );
        }
    }
}

#[test]
fn w2_axioms_on_random_point_sets() {
    for case in 0..50u64 {
        let mut rng = substream(11, "axiom", case);
        let n = 2 + (uniform01::<f64>(&mut rng) * 5.0) as usize;
        let d = 1 + (uniform01::<f64>(&mut rng) * 3.0) as usize;
        let a = random_points(case, n, d);
        let b = random_points(case + 1000, n, d);
        let c = random_points(case + 2000, n, d);

        let ab = w2_exact_small(&a, &b).unwrap();
        let ba = w2_exact_small(&b, &a).unwrap();
        let ac = w2_exact_small(&a, &c).unwrap();
        let cb = w2_exact_small(&c, &b).unwrap();

        assert!(ab >= 0.0);
        assert!((ab - ba).abs() < 1e-9, "symmetry violated");
        assert!(ab <= ac + cb + 1e-9, "triangle inequality violated");
        assert_eq!(w2_exact_small(&a, &a).unwrap(), 0.0);

        // zero iff equal multisets: permuting rows keeps distance zero
        let perm: Vec<Vec<f64>> = (0..n).rev().map(|i| a.row(i).to_vec()).collect();
        let a_perm = Matrix::from_rows(&perm).unwrap();
        assert!(w2_exact_small(&a, &a_perm).unwrap() < 1e-12);
        if ab > 1e-6 {
            assert!(ab > 0.0);
        }
    }
}

#[test]
fn w2_1d_agrees_with_assignment_in_1d() {
    for case in 0..20u64 {
        let n = 3 + (case as usize % 6);
        let a = random_points(case + 300, n, 1);
        let b = random_points(case + 400, n, 1);
        let sorted = w2_1d(a.data(), b.data()).unwrap();
        let assigned = w2_exact_small(&a, &b).unwrap();
        assert!(
            (sorted - assigned).abs() < 1e-9,
            "case {case}: {sorted} vs {assigned}"
        );
    }
}

#[test]
fn w2_1d_gaussian_scale_closed_form() {
    // N(0,1) vs N(0,4): W2 = |2 - 1| = 1, within 2% at 1e5 samples
    let n = 100_000;
    let a: Vec<f64> = normal_vec(&mut substream(5, "ga", 0), n);
    let b: Vec<f64> = normal_vec::<f64>(&mut substream(5, "gb", 0), n)
        .into_iter()
        .map(|v| 2.0 * v)
        .collect();
    let w = w2_1d(&a, &b).unwrap();
    assert!((w - 1.0).abs() < 0.02, "w2 = {w}");
}

#[test]
fn gaussian_closed_form_cross_checked_by_sampling() {
    let c1 = Matrix::from_vec(1, 1, vec![2.25]).unwrap();
    let c2 = Matrix::from_vec(1, 1, vec![0.25]).unwrap();
    let closed = w2_gaussian(&[0.5], &c1, &[-0.5], &c2).unwrap();
    let n = 100_000;
    let a: Vec<f64> = normal_vec::<f64>(&mut substream(6, "ga", 0), n)
        .into_iter()
        .map(|v| 1.5 * v + 0.5)
        .collect();
    let b: Vec<f64> = normal_vec::<f64>(&mut substream(6, "gb", 0), n)
        .into_iter()
        .map(|v| 0.5 * v - 0.5)
        .collect();
    let sampled = w2_1d(&a, &b).unwrap();
    assert!(
        (closed - sampled).abs() / closed < 0.02,
        "closed {closed} vs sampled {sampled}"
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn energy_score_nonnegative(
        samples in prop::collection::vec(prop::collection::vec(-50.0f64..50.0, 3), 2..12),
        truth in prop::collection::vec(-50.0f64..50.0, 3),
    ) {
        let m = Matrix::from_rows(&samples).unwrap();
        let es = energy_score(&m, &truth).unwrap();
        prop_assert!(es >= -1e-12, "energy score {es} < 0");
    }

    #[test]
    fn w2_1d_shift_invariance(
        xs in prop::collection::vec(-10.0f64..10.0, 2..40),
        shift in -5.0f64..5.0,
    ) {
        let ys: Vec<f64> = xs.iter().map(|v| v + shift).collect();
        let w = w2_1d(&xs, &ys).unwrap();
        prop_assert!((w - shift.abs()).abs() < 1e-9);
    }
}
