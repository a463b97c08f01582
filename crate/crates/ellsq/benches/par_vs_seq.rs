//! Data-parallel hot paths against their sequential twins. With the default
//! `parallel` feature the first entry of each group uses rayon; built with
//! `--no-default-features` both entries run the sequential code and should
//! coincide.

use criterion::{criterion_group, criterion_main, Criterion};

use ellsq::chords::{partition_function, partition_function_seq, Coloring};
use ellsq::mc::{run_trials, run_trials_seq};
use ellsq::spectral::{density_g, density_g_seq};

fn bench_partition_function(c: &mut Criterion) {
    let mut g = c.benchmark_group("diagram-partition-function-m8");
    g.bench_function("parallel", |b| {
        b.iter(|| partition_function(8, Coloring::U).unwrap())
    });
    g.bench_function("sequential", |b| {
        b.iter(|| partition_function_seq(8, Coloring::U).unwrap())
    });
    g.finish();
}

fn bench_density_grid(c: &mut Criterion) {
    let xs: Vec<f64> = (1..=160).map(|i| -2.5 + 5.0 * i as f64 / 160.0).collect();
    let mut g = c.benchmark_group("density-grid-160");
    g.sample_size(10);
    g.bench_function("parallel", |b| {
        b.iter(|| density_g(&xs, 0.5, 1e-6).unwrap())
    });
    g.bench_function("sequential", |b| {
        b.iter(|| density_g_seq(&xs, 0.5, 1e-6).unwrap())
    });
    g.finish();
}

fn bench_mc_trials(c: &mut Criterion) {
    let mut g = c.benchmark_group("mc-trials-n96-t4");
    g.sample_size(10);
    g.bench_function("parallel", |b| {
        b.iter(|| run_trials(96, 0.5, 4, 7, 1.0).unwrap())
    });
    g.bench_function("sequential", |b| {
        b.iter(|| run_trials_seq(96, 0.5, 4, 7, 1.0).unwrap())
    });
    g.finish();
}

criterion_group!(
    benches,
    bench_partition_function,
    bench_density_grid,
    bench_mc_trials
);
criterion_main!(benches);
