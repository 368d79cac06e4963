use criterion::{black_box, criterion_group, criterion_main, Criterion};

use poclab_bench::{clone_config, poc_graph, BENCH_SEED};
use poclab_core::cores::{cutoff_line_kcore, peel_kcore};
use poclab_core::numerics::{kcore_fixpoint, kcore_threshold};
use poclab_core::sat::{pure_literal_eliminate, sample_ksat};
use poclab_core::{sample_poc, SeedSpec};

fn bench_samplers(c: &mut Criterion) {
    let mut group = c.benchmark_group("samplers");
    group.bench_function("sample_poc_n10k_d2", |b| {
        b.iter(|| sample_poc(10_000, 2, 3.0, SeedSpec::new(BENCH_SEED, 2)).unwrap())
    });
    group.bench_function("sample_ksat_n10k_density1.5", |b| {
        b.iter(|| sample_ksat(10_000, 15_000, 3, SeedSpec::new(BENCH_SEED, 3)).unwrap())
    });
    group.finish();
}

fn bench_cores(c: &mut Criterion) {
    let mut group = c.benchmark_group("cores");
    let graph = poc_graph(10_000, 2, 4.0);
    group.bench_function("peel_kcore_n10k", |b| {
        b.iter(|| peel_kcore(black_box(&graph), 3, SeedSpec::new(BENCH_SEED, 4)))
    });
    let config = clone_config(2_000, 2, 4.0);
    group.bench_function("cutoff_line_n2k", |b| {
        b.iter(|| cutoff_line_kcore(black_box(&config), 3, SeedSpec::new(BENCH_SEED, 5)).unwrap())
    });
    group.finish();
}

fn bench_numerics(c: &mut Criterion) {
    let mut group = c.benchmark_group("numerics");
    group.bench_function("kcore_threshold_3_2", |b| {
        b.iter(|| kcore_threshold(black_box(3), 2).unwrap())
    });
    group.bench_function("kcore_fixpoint_4_3_2", |b| {
        b.iter(|| kcore_fixpoint(black_box(4.0), 3, 2).unwrap())
    });
    group.finish();
}

fn bench_sat(c: &mut Criterion) {
    let mut group = c.benchmark_group("sat");
    let formula = sample_ksat(10_000, 16_000, 3, SeedSpec::new(BENCH_SEED, 6)).unwrap();
    group.bench_function("pure_literal_eliminate_n10k", |b| {
        b.iter(|| pure_literal_eliminate(black_box(&formula), SeedSpec::new(BENCH_SEED, 7)))
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_samplers,
    bench_cores,
    bench_numerics,
    bench_sat
);
criterion_main!(benches);
