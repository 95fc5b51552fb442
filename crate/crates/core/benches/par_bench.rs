//! Norm-estimation benchmarks, labeled by execution mode so parallel and
//! sequential builds land in comparable criterion groups:
//!
//!   cargo bench -p trsc-core
//!   cargo bench -p trsc-core --no-default-features

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use trsc_core::matrices::{build_structured, multiply, MatrixKind};
use trsc_core::norms::{lp_norm, spectral_norm};
use trsc_core::par;

fn bench_spectral(c: &mut Criterion) {
    let mut group = c.benchmark_group(format!("spectral_norm/{}", par::mode()));
    for n in [256usize, 512, 1024] {
        let a = build_structured(&MatrixKind::Cesaro, n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| spectral_norm(a).value)
        });
    }
    group.finish();
}

fn bench_boyd(c: &mut Criterion) {
    let mut group = c.benchmark_group(format!("lp_norm_p3/{}", par::mode()));
    for n in [256usize, 512, 1024] {
        let a = build_structured(&MatrixKind::Cesaro, n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| lp_norm(a, 3.0).unwrap().lower.value)
        });
    }
    group.finish();
}

fn bench_multiply(c: &mut Criterion) {
    let mut group = c.benchmark_group(format!("triangular_multiply/{}", par::mode()));
    group.sample_size(10);
    for n in [256usize, 512] {
        let a = build_structured(&MatrixKind::Fejer, n).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| multiply(a, a).unwrap().entry(n - 1, 0))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_spectral, bench_boyd, bench_multiply);
criterion_main!(benches);
