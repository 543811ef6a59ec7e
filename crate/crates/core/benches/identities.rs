//! One seeded sample of every identity, 1-thread pool against the default pool.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rayon::ThreadPoolBuilder;
use ricci_core::verify::{measure_sample_all, Identity};

fn pools(c: &mut Criterion) {
    let single = ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let default = ThreadPoolBuilder::new().build().unwrap();
    let mut group = c.benchmark_group("identities");
    group.sample_size(10);
    for (dim, n) in [(2, 64), (3, 32)] {
        let label = format!("n{dim}-N{n}");
        for (name, pool) in [("1-thread", &single), ("default", &default)] {
            group.bench_function(BenchmarkId::new(name, &label), |b| {
                b.iter(|| pool.install(|| black_box(measure_sample_all(&Identity::ALL, dim, n, 1, 0, None).unwrap())))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, pools);
criterion_main!(benches);
