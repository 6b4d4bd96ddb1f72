use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use entrywise_bench::fixture;
use entrywise_core::simulation::{noise_sweep, NoiseLaw, SweepConfig};
use entrywise_core::{
    estimate_entry, path_space_basis, variance_bound, CompletionGraph, NoiseSpec,
};

fn reachable(graph: &CompletionGraph) -> (usize, usize) {
    graph
        .reconstructible_set()
        .into_iter()
        .find(|&e| !graph.has_edge(e))
        .expect("some missing entry is reconstructible")
}

fn basis(c: &mut Criterion) {
    let mut group = c.benchmark_group("path_space_basis");
    for (m, n, k) in [(20, 20, 80), (50, 50, 200), (100, 100, 600)] {
        let (_, graph, _) = fixture(m, n, k, 1);
        let entry = reachable(&graph);
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{m}x{n}/{k}")),
            &entry,
            |b, &e| b.iter(|| path_space_basis(&graph, black_box(e)).unwrap()),
        );
    }
    group.finish();
}

fn single_entry(c: &mut Criterion) {
    let (_, graph, inst) = fixture(50, 50, 200, 2);
    let entry = reachable(&graph);
    let noise = NoiseSpec::Uniform(0.5);
    let obs = inst.observe_exact(&graph);
    c.bench_function("variance_bound 50x50/200", |b| {
        b.iter(|| variance_bound(&graph, black_box(entry), &noise).unwrap())
    });
    c.bench_function("estimate_entry 50x50/200", |b| {
        b.iter(|| estimate_entry(&graph, &obs, black_box(entry), &noise).unwrap())
    });
}

fn variance_map(c: &mut Criterion) {
    let (_, graph, _) = fixture(50, 50, 200, 3);
    let noise = NoiseSpec::Uniform(1.0);
    let mut group = c.benchmark_group("variance_map");
    group.sample_size(10);
    group.bench_function("50x50/200", |b| {
        b.iter(|| {
            let mut total = 0.0;
            for i in 0..50 {
                for j in 0..50 {
                    let v = variance_bound(&graph, (i, j), &noise).unwrap();
                    if v.is_finite() {
                        total += v;
                    }
                }
            }
            total
        })
    });
    group.finish();
}

fn sweep(c: &mut Criterion) {
    let config = SweepConfig {
        rows: 30,
        cols: 30,
        known: 120,
        masks: 1,
        levels: vec![0.5],
        trials: 100,
        seed: 0,
        law: NoiseLaw::LogNormal,
    };
    let mut group = c.benchmark_group("noise_sweep");
    group.sample_size(10);
    group.bench_function("30x30/120, 100 trials", |b| {
        b.iter(|| noise_sweep(&config).unwrap())
    });
    group.finish();
}

criterion_group!(benches, basis, single_entry, variance_map, sweep);
criterion_main!(benches);
