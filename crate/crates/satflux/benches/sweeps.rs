//! Parameter-sweep benchmarks: rayon-backed path vs the sequential fallback.
//!
//! With the default `parallel` feature the `*_par` benchmarks exercise the
//! rayon dispatch; built with `--no-default-features` both paths run the
//! same sequential code, which is the point of the comparison.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use satflux::time_map::{boundary_curve, boundary_curve_seq};

fn a_grid(n: usize) -> Vec<f64> {
    (1..=n).map(|i| 0.35 * i as f64 / (n + 1) as f64).collect()
}

fn bench_boundary_curve(c: &mut Criterion) {
    let mut group = c.benchmark_group("boundary_curve");
    group.sample_size(10);
    for n in [8usize, 32] {
        let grid = a_grid(n);
        group.bench_with_input(BenchmarkId::new("seq", n), &grid, |b, g| {
            b.iter(|| black_box(boundary_curve_seq(1.0, g)))
        });
        group.bench_with_input(BenchmarkId::new("par", n), &grid, |b, g| {
            b.iter(|| black_box(boundary_curve(1.0, g)))
        });
    }
    group.finish();
}

fn bench_onset_curve(c: &mut Criterion) {
    let mut group = c.benchmark_group("onset_curve");
    group.bench_function("par_10k", |b| {
        b.iter(|| black_box(satflux::bifurcation::sample_onset_curve(1.0, 25.0, 10_000)))
    });
    group.finish();
}

criterion_group!(benches, bench_boundary_curve, bench_onset_curve);
criterion_main!(benches);
