use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use evoplan_bench::bench_scenario;
use evoplan_core::{plan, Mode};

fn planner_scaling(c: &mut Criterion) {
    let mut group = c.benchmark_group("plan_shared");
    group.sample_size(10);
    for &stations in &[100usize, 200, 400] {
        let sc = bench_scenario(stations, 12, 11);
        group.bench_with_input(BenchmarkId::from_parameter(stations), &sc, |b, sc| {
            b.iter(|| plan(sc, Mode::Shared))
        });
    }
    group.finish();
}

fn planner_modes(c: &mut Criterion) {
    let sc = bench_scenario(200, 12, 11);
    c.bench_function("plan_independent_200", |b| {
        b.iter(|| plan(&sc, Mode::Independent))
    });
}

criterion_group!(benches, planner_scaling, planner_modes);
criterion_main!(benches);
