use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qdisturb::disturbance::haar_average_disturbance;
use qdisturb::parallel::with_threads;
use qdisturb::states::werner_states;
use qdisturb::{quantumness, Distance, Ensemble, MeasurementScope, OptimizerConfig};

fn pools() -> [(&'static str, Option<usize>); 2] {
    [("one-thread", Some(1)), ("all-threads", None)]
}

fn haar(c: &mut Criterion) {
    let mut g = c.benchmark_group("haar_monte_carlo");
    g.sample_size(10);
    let scope = MeasurementScope::all(2);
    for (name, threads) in pools() {
        g.bench_function(BenchmarkId::new(name, "3x3 two-sided, 16000 samples"), |b| {
            b.iter(|| with_threads(threads, || haar_average_disturbance(black_box(&[3, 3]), &scope, 16_000, 0).unwrap()))
        });
    }
    g.finish();
}

fn restarts(c: &mut Criterion) {
    let mut g = c.benchmark_group("quantumness_restarts");
    g.sample_size(10);
    let (a, b) = werner_states(3).unwrap();
    let e = Ensemble::uniform(vec![a, b]).unwrap();
    let scope = MeasurementScope::single(0);
    let cfg = OptimizerConfig { restarts: 16, ..OptimizerConfig::default() };
    for (name, threads) in pools() {
        g.bench_function(BenchmarkId::new(name, "werner d=3, 16 restarts"), |b| {
            b.iter(|| with_threads(threads, || quantumness(black_box(&e), &scope, Distance::Trace, &cfg).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, haar, restarts);
criterion_main!(benches);
