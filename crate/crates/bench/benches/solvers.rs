use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use remest_core::*;

fn model_a(c: &mut Criterion) {
    let spec = ModelSpecA::birth_death(0.3, 0.9).unwrap();
    c.bench_function("model_a/performance_k10", |b| {
        b.iter(|| performance(black_box(&spec), 10u32, None).unwrap())
    });
    c.bench_function("model_a/optimal_constrained", |b| {
        b.iter(|| optimal_constrained(black_box(&spec), 0.1).unwrap())
    });
    c.bench_function("model_a/value_iterate", |b| {
        b.iter(|| value_iterate(black_box(&spec), 20.0, 1e-9).unwrap())
    });
}

fn model_b(c: &mut Criterion) {
    let spec = ModelSpecB::gauss_markov(1.0, 1.0, 1.0).unwrap();
    let opts = FredholmOptions::default();
    c.bench_function("model_b/solve_lm_k1", |b| {
        b.iter(|| solve_lm_b(black_box(&spec), 1.0, &opts).unwrap())
    });
    c.bench_function("model_b/algorithm2_alpha0.5", |b| {
        b.iter(|| algorithm2_constrained(black_box(&spec), 0.5, 1e-6).unwrap())
    });
}

fn simulation(c: &mut Criterion) {
    let spec: ModelSpec = ModelSpecA::birth_death(0.3, 1.0).unwrap().into();
    let policy = PolicySpec::Threshold(3u32.into());
    let cfg = SimConfig {
        horizon: 10_000,
        replications: 8,
        seed: 1,
        parallel: false,
        ..SimConfig::default()
    };
    c.bench_function("simulate/threshold_8x10k", |b| {
        b.iter(|| simulate(black_box(&spec), &policy, &cfg).unwrap())
    });
}

criterion_group!(benches, model_a, model_b, simulation);
criterion_main!(benches);
