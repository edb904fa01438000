//! End-to-end smoke tests on generated instances: planning succeeds and
//! the resulting schedules satisfy the demand, competition and budget
//! postconditions in both modes.

use evoplan_core::{
    generate, goal1_violations, goal1_violations_independent, goal2_satisfied, plan,
    validate_schedule, GeneratorParams, Mode, PlanStatus,
};

fn params(seed: u64) -> GeneratorParams {
    GeneratorParams {
        stations: 60,
        clusters: 220,
        operators: 2,
        horizon: 12,
        growth: 4.0,
        seed,
        ..GeneratorParams::default()
    }
}

#[test]
fn shared_plan_meets_goals() {
    let sc = generate(&params(42)).unwrap();
    let result = plan(&sc, Mode::Shared);
    assert_eq!(result.status, PlanStatus::Success, "{:?}", result.status);
    assert!(validate_schedule(&sc, &result.schedule, Mode::Shared).is_empty());
    assert!(goal1_violations(&sc, &result.schedule).is_empty());
    for k in 1..=sc.horizon {
        let (frac, ok) = goal2_satisfied(&sc, &result.schedule, k, Mode::Shared);
        assert!(ok, "period {k}: compliance {frac}");
        assert!(result.schedule.count_at(k) <= sc.change_rate as usize);
    }
}

#[test]
fn independent_plan_meets_goals() {
    let sc = generate(&params(43)).unwrap();
    let result = plan(&sc, Mode::Independent);
    assert_eq!(result.status, PlanStatus::Success, "{:?}", result.status);
    assert!(validate_schedule(&sc, &result.schedule, Mode::Independent).is_empty());
    assert!(goal1_violations_independent(&sc, &result.schedule).is_empty());
    for k in 1..=sc.horizon {
        let (frac, ok) = goal2_satisfied(&sc, &result.schedule, k, Mode::Independent);
        assert!(ok, "period {k}: compliance {frac}");
    }
}

#[test]
fn planning_is_deterministic() {
    let sc = generate(&params(44)).unwrap();
    let a = plan(&sc, Mode::Shared);
    let b = plan(&sc, Mode::Shared);
    assert_eq!(a.schedule.changes(), b.schedule.changes());
    assert_eq!(a.total_cost.to_bits(), b.total_cost.to_bits());
}
