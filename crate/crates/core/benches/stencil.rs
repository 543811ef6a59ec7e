//! Stencil-bound kernels in a 1-thread pool against the default pool.

use std::f64::consts::TAU;

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPoolBuilder;
use ricci_core::curvature::ricci;
use ricci_core::deriv::gradient;
use ricci_core::random::{sample_rng, TrigMetric};
use ricci_core::{Chart, MetricField};

fn metric(dim: usize, n: usize) -> MetricField {
    let chart = Chart::periodic(dim, n, TAU).unwrap();
    MetricField::from_source(&chart, &TrigMetric::random(dim, &mut sample_rng(1, 0))).unwrap()
}

fn pools(c: &mut Criterion) {
    let single = ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let default = ThreadPoolBuilder::new().build().unwrap();
    let mut group = c.benchmark_group("stencil");
    group.sample_size(10);
    for (dim, n) in [(2, 128), (3, 32)] {
        let g = metric(dim, n);
        let label = format!("n{dim}-N{n}");
        for (name, pool) in [("1-thread", &single), ("default", &default)] {
            group.bench_with_input(BenchmarkId::new(format!("gradient/{name}"), &label), &g, |b, g| {
                b.iter(|| pool.install(|| black_box(gradient(g.field()))))
            });
            group.bench_with_input(BenchmarkId::new(format!("ricci/{name}"), &label), &g, |b, g| {
                b.iter(|| pool.install(|| black_box(ricci(g))))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, pools);
criterion_main!(benches);
