//! Parallel vs sequential throughput on the two data-parallel workloads:
//! oracle ensemble validation and the gamma-shape sweep.
//!
//! Run with `cargo bench -p ghr-core`. The `parallel` group only appears
//! when the (default) `parallel` feature is enabled; build with
//! `--no-default-features` to measure the pure sequential binary.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use ghr_core::bound::{gamma_sweep_seq, SweepRow};
use ghr_core::oracle::{validate_ensemble_seq, ModelSpec};

#[cfg(feature = "parallel")]
use ghr_core::bound::gamma_sweep;
#[cfg(feature = "parallel")]
use ghr_core::oracle::validate_ensemble;

fn ensemble_specs(count: u64, dim: usize) -> Vec<ModelSpec> {
    (0..count).map(|seed| ModelSpec::Random { seed, dim }).collect()
}

fn bench_ensemble(c: &mut Criterion) {
    let specs = ensemble_specs(48, 12);
    let mut group = c.benchmark_group("validate_ensemble/48x12");
    group.bench_function("sequential", |b| {
        b.iter(|| validate_ensemble_seq(black_box(&specs), 5, 1e-8).unwrap())
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| validate_ensemble(black_box(&specs), 5, 1e-8).unwrap())
    });
    group.finish();
}

fn bench_sweep(c: &mut Criterion) {
    let shapes: Vec<f64> = (1..=2000).map(|i| 0.05 * i as f64).collect();
    let mut group = c.benchmark_group("gamma_sweep/2000");
    group.bench_function("sequential", |b| {
        b.iter(|| -> Vec<SweepRow> { gamma_sweep_seq(black_box(&shapes), 5).unwrap() })
    });
    #[cfg(feature = "parallel")]
    group.bench_function("parallel", |b| {
        b.iter(|| -> Vec<SweepRow> { gamma_sweep(black_box(&shapes), 5).unwrap() })
    });
    group.finish();
}

criterion_group!(benches, bench_ensemble, bench_sweep);
criterion_main!(benches);
