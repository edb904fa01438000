//! Benchmark helpers: canned generator configurations shared by the
//! criterion benches and the scaling measurements.

use evoplan_core::{generate, GeneratorParams, Scenario};

/// A mid-density planning instance with `stations` base stations and
/// four clusters per station, horizon `horizon`.
pub fn bench_scenario(stations: usize, horizon: u32, seed: u64) -> Scenario {
    let params = GeneratorParams {
        stations,
        clusters: stations * 4,
        operators: 2,
        horizon,
        growth: 4.0,
        seed,
        ..GeneratorParams::default()
    };
    generate(&params).expect("generator accepts bench parameters")
}
