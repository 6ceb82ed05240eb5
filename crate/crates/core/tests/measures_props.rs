//! Property tests for the metric layer.

use proptest::prelude::*;
use rsde_core::measures::{solve_assignment, wasserstein_k, EmpiricalMeasure};

fn measure_1d(xs: &[f64]) -> EmpiricalMeasure {
    EmpiricalMeasure::from_samples_1d(xs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Metric axioms for W_k, k >= 1, on random equal-size triples.
    #[test]
    fn w2_metric_axioms(
        xs in prop::collection::vec(-5.0f64..5.0, 16),
        ys in prop::collection::vec(-5.0f64..5.0, 16),
        zs in prop::collection::vec(-5.0f64..5.0, 16),
    ) {
        let (a, b, c) = (measure_1d(&xs), measure_1d(&ys), measure_1d(&zs));
        for k in [1.0, 2.0] {
            let ab = wasserstein_k(k, &a, &b).unwrap();
            let ba = wasserstein_k(k, &b, &a).unwrap();
            prop_assert!((ab - ba).abs() < 1e-12, "symmetry: {ab} vs {ba}");
            let ac = wasserstein_k(k, &a, &c).unwrap();
            let cb = wasserstein_k(k, &c, &b).unwrap();
            prop_assert!(ab <= ac + cb + 1e-9, "triangle: {ab} > {ac} + {cb}");
            prop_assert!(wasserstein_k(k, &a, &a).unwrap() < 1e-12);
        }
    }

    // 1D assignment oracle: for k >= 1 the exact assignment equals the
    // sorted (monotone) coupling.
    #[test]
    fn assignment_matches_sorted_coupling(
        xs in prop::collection::vec(-3.0f64..3.0, 24),
        ys in prop::collection::vec(-3.0f64..3.0, 24),
    ) {
        let n = xs.len();
        for k in [1.0f64, 2.0] {
            let cost: Vec<f64> = (0..n * n)
                .map(|i| (xs[i / n] - ys[i % n]).abs().powf(k))
                .collect();
            let (_, total) = solve_assignment(&cost, n).unwrap();
            let assign_w = (total / n as f64).powf(1.0 / k.max(1.0));
            let sorted_w = wasserstein_k(k, &measure_1d(&xs), &measure_1d(&ys)).unwrap();
            prop_assert!(
                (assign_w - sorted_w).abs() < 1e-10,
                "k={k}: assignment {assign_w} vs sorted {sorted_w}"
            );
        }
    }

    // Translation invariance of W_1 in 1D: shifting one sample by s costs s.
    #[test]
    fn translation_cost(
        xs in prop::collection::vec(-2.0f64..2.0, 32),
        s in 0.01f64..1.0,
    ) {
        let shifted: Vec<f64> = xs.iter().map(|x| x + s).collect();
        let w = wasserstein_k(1.0, &measure_1d(&xs), &measure_1d(&shifted)).unwrap();
        prop_assert!((w - s).abs() < 1e-10);
    }
}
