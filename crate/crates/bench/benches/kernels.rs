use std::hint::black_box;

use agiven_bench::bench_scenario;
use agiven_core::foci::hit_ratio;
use agiven_core::mana::{accomplishment_ratio, mg1_delay};
use agiven_core::numerics::reg_lower_gamma;
use agiven_core::optimizer::solve_p1;
use agiven_core::sim::{simulate_mana, SimControl};
use criterion::{criterion_group, criterion_main, Criterion};

fn numerics(c: &mut Criterion) {
    c.bench_function("reg_lower_gamma s=50", |b| b.iter(|| reg_lower_gamma(black_box(50.0), black_box(40.0))));
    c.bench_function("reg_lower_gamma s=5000", |b| b.iter(|| reg_lower_gamma(black_box(5000.0), black_box(4900.0))));
}

fn analytic(c: &mut Criterion) {
    let s = bench_scenario();
    c.bench_function("accomplishment_ratio", |b| b.iter(|| accomplishment_ratio(black_box(&s.mana), &s.mobility)));
    c.bench_function("mg1_delay", |b| b.iter(|| mg1_delay(black_box(&s.mana), &s.mobility)));
    c.bench_function("hit_ratio C_p=100", |b| b.iter(|| hit_ratio(&s.foci.popularity, black_box(0.5), 100)));
}

fn optimizer(c: &mut Criterion) {
    let s = bench_scenario();
    let demand = s.demand();
    c.bench_function("solve_p1 compact grid", |b| b.iter(|| solve_p1(&s.budget, &demand, black_box(&s.grid))));
}

fn simulator(c: &mut Criterion) {
    let s = bench_scenario();
    let mut g = c.benchmark_group("simulate");
    g.sample_size(10);
    g.bench_function("mana 1e5 vehicles", |b| {
        b.iter(|| simulate_mana(&s.mana, &s.mobility, &SimControl::new(black_box(1), 100_000)))
    });
    g.finish();
}

criterion_group!(benches, numerics, analytic, optimizer, simulator);
criterion_main!(benches);
