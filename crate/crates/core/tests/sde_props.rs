//! Trajectory-level properties of the particle simulator.

use rsde_core::geometry::Domain;
use rsde_core::measures::wasserstein_k;
use rsde_core::rng::{stream, CounterRng};
use rsde_core::sde::{
    simulate_mckean, CoefficientSpec, InitialMeasure, InteractionKernel, Potential, SimConfig,
};

// Local time accrues only near the boundary: with a diffusion whose one-step
// reach is well under sqrt(h), the share of local time collected while the
// pre-step point sits farther than sqrt(h) from the boundary is negligible.
#[test]
fn local_time_supported_near_boundary() {
    let domain = Domain::interval(0.0, 1.0).unwrap();
    let sigma = 0.35;
    let h = 1e-3f64;
    let sqrt_h = h.sqrt();
    let rng = CounterRng::new(44, stream::SCRATCH);
    let mut total = 0.0;
    let mut far = 0.0;
    for p in 0..64u64 {
        let r = rng.at(p);
        let mut x = vec![0.5f64];
        for s in 0..4000u64 {
            let pre_sd = domain.signed_distance(&x);
            let disp = [sigma * sqrt_h * r.normal(s, 0)];
            let out = domain.reflect_step(&x, &disp).unwrap();
            total += out.local_time_increment;
            if pre_sd > sqrt_h {
                far += out.local_time_increment;
            }
            x = out.position;
        }
    }
    assert!(total > 0.0, "no boundary contact at all");
    assert!(
        far / total < 0.01,
        "{:.3}% of local time accrued away from the boundary",
        100.0 * far / total
    );
}

// Propagation-of-chaos smoke test: the distance between the empirical laws
// of two independent runs at sizes N and 4N shrinks as N grows.
#[test]
fn chaos_gap_shrinks_with_n() {
    let base = |n: usize, seed: u64| {
        let mut cfg = SimConfig::new(
            Domain::interval(-4.0, 4.0).unwrap(),
            CoefficientSpec::granular(
                Potential::Quadratic { coeff: 1.0 },
                InteractionKernel::Quadratic { scale: 0.5 },
                0.7,
            ),
            InitialMeasure::UniformBox { lo: vec![-1.0], hi: vec![1.0] },
            0.5,
            2e-3,
            n,
            seed,
        );
        cfg.snapshot_stride = 1_000_000; // terminal snapshot only
        cfg
    };
    // average the gap over independent seed pairs: a single pair is too
    // noisy for a clean trend at these sizes
    let replicas = 6u64;
    let mut gaps = Vec::new();
    for n in [256usize, 1024, 4096] {
        let mut mean = 0.0;
        for r in 0..replicas {
            let small = simulate_mckean(&base(n, 101 + 2 * r)).unwrap();
            let large = simulate_mckean(&base(4 * n, 102 + 2 * r)).unwrap();
            let a = small.flow.terminal().clone();
            let b = large.flow.terminal().clone();
            mean += wasserstein_k(2.0, &a, &b).unwrap();
        }
        gaps.push(mean / replicas as f64);
    }
    assert!(
        gaps[0] > gaps[1] && gaps[1] > gaps[2],
        "no monotone decrease: {gaps:?}"
    );
}

// Identical configs (including seeds) give bit-identical flows regardless of
// the thread count; changing the seed changes the flow.
#[test]
fn determinism_and_seed_sensitivity() {
    let mk = |seed: u64, threads: usize| {
        let mut cfg = SimConfig::new(
            Domain::ball(vec![0.0, 0.0], 2.0).unwrap(),
            CoefficientSpec::granular(
                Potential::Quadratic { coeff: 0.5 },
                InteractionKernel::Quadratic { scale: 0.25 },
                0.6,
            ),
            InitialMeasure::Gaussian { mean: vec![0.0, 0.0], sd: 0.5 },
            0.3,
            1e-3,
            300,
            seed,
        );
        cfg.threads = threads;
        cfg
    };
    let a = simulate_mckean(&mk(7, 1)).unwrap();
    let b = simulate_mckean(&mk(7, 2)).unwrap();
    assert_eq!(a.ensemble, b.ensemble);
    assert_eq!(a.flow, b.flow);
    let c = simulate_mckean(&mk(8, 1)).unwrap();
    assert_ne!(a.ensemble, c.ensemble);
}
