//! Hot-kernel benchmarks: one-step reflection, exact assignment, the 1D
//! transport distance, and particle stepping throughput.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use std::hint::black_box;

use rsde_core::geometry::Domain;
use rsde_core::measures::{solve_assignment, wasserstein_k, EmpiricalMeasure};
use rsde_core::rng::{stream, CounterRng};
use rsde_core::sde::{
    simulate_mckean, CoefficientSpec, InitialMeasure, InteractionKernel, Potential, SimConfig,
};

fn bench_reflect(c: &mut Criterion) {
    let ball = Domain::ball(vec![0.0, 0.0], 1.0).unwrap();
    let interval = Domain::interval(0.0, 1.0).unwrap();
    c.bench_function("reflect_step/ball2d", |b| {
        b.iter(|| {
            let r = ball
                .reflect_step(black_box(&[0.9, 0.0]), black_box(&[0.3, 0.3]))
                .unwrap();
            black_box(r.local_time_increment)
        })
    });
    c.bench_function("reflect_step/interval_fold", |b| {
        b.iter(|| {
            let r = interval
                .reflect_step(black_box(&[0.5]), black_box(&[3.7]))
                .unwrap();
            black_box(r.position[0])
        })
    });
}

fn bench_assignment(c: &mut Criterion) {
    let rng = CounterRng::new(1, stream::SCRATCH);
    let n = 128;
    let cost: Vec<f64> = (0..n * n).map(|k| rng.uniform(k as u64, 0)).collect();
    c.bench_function("assignment/128", |b| {
        b.iter(|| black_box(solve_assignment(black_box(&cost), n).unwrap().1))
    });
}

fn bench_wasserstein_1d(c: &mut Criterion) {
    let rng = CounterRng::new(2, stream::SCRATCH);
    let xs: Vec<f64> = (0..4096).map(|i| rng.uniform(i, 0)).collect();
    let ys: Vec<f64> = (0..4096).map(|i| rng.uniform(i, 1)).collect();
    let mu = EmpiricalMeasure::from_samples_1d(&xs).unwrap();
    let nu = EmpiricalMeasure::from_samples_1d(&ys).unwrap();
    c.bench_function("wasserstein2_1d/4096", |b| {
        b.iter_batched(
            || (mu.clone(), nu.clone()),
            |(a, b_)| black_box(wasserstein_k(2.0, &a, &b_).unwrap()),
            BatchSize::SmallInput,
        )
    });
}

fn bench_stepper(c: &mut Criterion) {
    let cfg = SimConfig::new(
        Domain::interval(-4.0, 4.0).unwrap(),
        CoefficientSpec::granular(
            Potential::Quadratic { coeff: 1.0 },
            InteractionKernel::Quadratic { scale: 0.5 },
            0.7,
        ),
        InitialMeasure::UniformBox { lo: vec![-1.0], hi: vec![1.0] },
        0.05,
        1e-3,
        4000,
        5,
    );
    c.bench_function("simulate/4000x50", |b| {
        b.iter(|| black_box(simulate_mckean(black_box(&cfg)).unwrap().stats.local_time[0]))
    });
}

criterion_group!(benches, bench_reflect, bench_assignment, bench_wasserstein_1d, bench_stepper);
criterion_main!(benches);
