use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use invariant_means::verify::{self, ScanConfig};
use invariant_means::Execution;

fn scans(c: &mut Criterion) {
    let mut group = c.benchmark_group("scan");
    group.sample_size(10);
    for (claim, samples) in [("conj1", 2_000), ("conj2", 20_000)] {
        for (name, execution) in [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)] {
            let cfg = ScanConfig {
                samples,
                execution,
                ..Default::default()
            };
            group.bench_with_input(BenchmarkId::new(claim, name), &cfg, |b, cfg| {
                b.iter(|| verify::run_claim(black_box(claim), cfg).unwrap())
            });
        }
    }
    group.finish();
}

criterion_group!(benches, scans);
criterion_main!(benches);
