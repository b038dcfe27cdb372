use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use purf::{
    catalog_model, count_m12, fit_forest_on, fit_tree, oracle_tree, Integrator, MasterSeed, Purpose, UniformPartition,
};

fn partitions(k: usize, count: usize) -> Vec<UniformPartition> {
    let seed = MasterSeed(1);
    (0..count as u64)
        .map(|i| UniformPartition::sample(k, &mut seed.substream(i, Purpose::Partition, 0)))
        .collect()
}

fn bench_m12(c: &mut Criterion) {
    let mut group = c.benchmark_group("count_m12");
    for k in [10usize, 100, 1000] {
        let p = partitions(k, 2);
        group.bench_with_input(BenchmarkId::from_parameter(k), &p, |b, p| {
            b.iter(|| count_m12(&p[0], &p[1]).unwrap())
        });
    }
    group.finish();
}

fn bench_fit(c: &mut Criterion) {
    let model = catalog_model("sine-uniform").unwrap();
    let seed = MasterSeed(2);
    let mut group = c.benchmark_group("fit");
    for n in [1_000usize, 10_000] {
        let sample = model.sample(n, &mut seed.substream(0, Purpose::Sample, 0)).unwrap();
        let k = 20;
        let one = partitions(k, 1).remove(0);
        group.bench_with_input(BenchmarkId::new("tree", n), &sample, |b, s| {
            b.iter(|| fit_tree(s, one.clone()).unwrap())
        });
        let many = partitions(k, 100);
        group.bench_with_input(BenchmarkId::new("forest_q100", n), &sample, |b, s| {
            b.iter(|| fit_forest_on(s, black_box(many.clone())).unwrap())
        });
    }
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let model = catalog_model("sine-uniform").unwrap();
    let quad = Integrator::default();
    let mut group = c.benchmark_group("oracle_tree");
    for k in [10usize, 100] {
        let p = partitions(k, 1).remove(0);
        group.bench_with_input(BenchmarkId::from_parameter(k), &p, |b, p| {
            b.iter(|| oracle_tree(&model, p.clone(), &quad).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_m12, bench_fit, bench_oracle);
criterion_main!(benches);
