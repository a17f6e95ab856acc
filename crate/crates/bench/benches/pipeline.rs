use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tsketch::recovery::{exhaustive_search, SampledProblem};
use tsketch::structure::{clustered_approx, ClusterApproxParams};
use tsketch::{
    draw_sampling_plan, frobenius_via_weighted_column, recover, universal_tau_bounds, vandermonde_synthesize,
    Family, FourierFactor, SamplingPlan, SearchSpace,
};
use tsketch_bench::{instance, sweep_config};

fn primitives(c: &mut Criterion) {
    let mut g = c.benchmark_group("primitives");
    for d in [256usize, 4096] {
        let inst = instance(Family::RandomVandermonde, d, 4, 1);
        g.bench_with_input(BenchmarkId::new("synthesize", d), &inst.factor, |b, f| {
            b.iter(|| vandermonde_synthesize(black_box(f)))
        });
        let other = vandermonde_synthesize(&instance(Family::RandomVandermonde, d, 4, 2).factor);
        g.bench_with_input(BenchmarkId::new("weighted_norm", d), &d, |b, _| {
            b.iter(|| frobenius_via_weighted_column(black_box(&inst.matrix), black_box(&other)))
        });
        g.bench_with_input(BenchmarkId::new("tau_bounds", d), &d, |b, &d| {
            b.iter(|| universal_tau_bounds(black_box(d), 32))
        });
        let bounds = universal_tau_bounds(d, 32).unwrap();
        g.bench_with_input(BenchmarkId::new("draw_plan_m256", d), &bounds, |b, bounds| {
            b.iter(|| draw_sampling_plan(black_box(bounds), 256, 7))
        });
    }
    g.finish();
}

fn recovery(c: &mut Criterion) {
    let mut g = c.benchmark_group("recover_greedy");
    g.sample_size(10);
    for d in [256usize, 1024, 4096] {
        let inst = instance(Family::Circulant, d, 2, 3);
        let cfg = sweep_config(2, 5);
        g.bench_with_input(BenchmarkId::from_parameter(d), &inst.matrix, |b, t| {
            b.iter(|| recover(black_box(t), &cfg).unwrap())
        });
    }
    g.finish();

    let d = 64;
    let inst = instance(Family::Circulant, d, 2, 3);
    let plan = SamplingPlan::full(d);
    let problem = SampledProblem::new(&plan, inst.matrix.first_column(), 1e-12).unwrap();
    let space = SearchSpace::new(d, 2, 2, 1.0 / (2.0 * d as f64)).unwrap();
    c.bench_function("exhaustive_d64_r2", |b| b.iter(|| exhaustive_search(black_box(&problem), &space, true).unwrap()));
}

fn cluster_fit(c: &mut Criterion) {
    let d = 128;
    let f_star = 40.5 / d as f64;
    let pairs = [(f_star - 0.3 / d as f64, 1.0), (f_star + 0.2 / d as f64, 0.7)];
    let factor = FourierFactor::from_pairs(d, &pairs, 0.0).unwrap();
    let params = ClusterApproxParams::new(d, 1e-6, 1e-3);
    c.bench_function("clustered_approx_d128", |b| b.iter(|| clustered_approx(black_box(&factor), f_star, &params).unwrap()));
}

criterion_group!(benches, primitives, recovery, cluster_fit);
criterion_main!(benches);
