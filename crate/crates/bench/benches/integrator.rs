use std::f64::consts::FRAC_PI_2;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use gaqb_core::{
    evolve, run_sweep, CouplingLayout, DensityMatrix, Generator, LiouvillianSpec, SweepConfig, TimeGrid, Topology,
};

fn spec(topology: Topology, theta: f64) -> LiouvillianSpec {
    LiouvillianSpec::from_layout(&CouplingLayout::new(topology, theta, 0.1).unwrap(), 1.0).unwrap()
}

fn derivative(c: &mut Criterion) {
    let s = spec(Topology::Nested, 0.7);
    let rho = *DensityMatrix::charger_excited().matrix();
    c.bench_function("derivative/nested", |b| b.iter(|| s.derivative(0.0, black_box(&rho))));
}

fn charge(c: &mut Criterion) {
    let s = spec(Topology::Braided, FRAC_PI_2);
    let rho0 = DensityMatrix::charger_excited();
    let grid = TimeGrid::new(0.0, 100.0, 0.005, 50).unwrap();
    c.bench_function("evolve/braided_rk4_20k_steps", |b| {
        b.iter(|| evolve(&s, &rho0, &grid).unwrap())
    });
}

fn sweep(c: &mut Criterion) {
    let config = SweepConfig {
        theta_steps: 8,
        t_max: 20.0,
        dt: 0.01,
        sample_stride: 20,
        ..SweepConfig::new(Topology::Separated)
    };
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    group.bench_function("separated_8x100", |b| b.iter(|| run_sweep(&config).unwrap()));
    group.finish();
}

criterion_group!(benches, derivative, charge, sweep);
criterion_main!(benches);
