//! Oracle certification: cross-checks the production planner against the
//! independent brute-force reference on instances small enough to
//! enumerate exhaustively.

use evoplan_core::{
    greedy_deadline_schedule, greedy_with_direction, oracle_feasible_sets, oracle_min_cost_plan,
    oracle_schedule, plan, BaseStation, Direction, Mode, OracleBudget, Scenario, StationType,
    SubscriberCluster, TechClass,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn greedy_lateness_matches_oracle_on_feasible_sets() {
    let budget = OracleBudget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut checked = 0;
    for _ in 0..600 {
        let k = rng.gen_range(1..=budget.max_horizon);
        let n = rng.gen_range(1..=3u32);
        for set in oracle_feasible_sets(k, n, 4, rng.r#gen()) {
            if set.len() > budget.max_requests {
                continue;
            }
            let (_, greedy_lateness) =
                greedy_deadline_schedule(&set, n, k).expect("sampled sets are feasible");
            let (oracle_lateness, _) = oracle_schedule(&set, n, k, &budget)
                .unwrap()
                .expect("sampled sets are feasible");
            assert_eq!(
                greedy_lateness, oracle_lateness,
                "lateness mismatch on {set:?} n={n} k={k}"
            );
            checked += 1;
        }
    }
    assert!(checked > 1000, "{checked} sets checked");
}

#[test]
fn earliest_direction_never_schedules_later_than_latest() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut strict = 0;
    for _ in 0..500 {
        let k = rng.gen_range(1..=8u32);
        let n = rng.gen_range(1..=3u32);
        for set in oracle_feasible_sets(k, n, 2, rng.r#gen()) {
            let (mut latest, _) =
                greedy_with_direction(&set, n, k, Direction::LatestFeasible).unwrap();
            let (mut earliest, _) =
                greedy_with_direction(&set, n, k, Direction::EarliestFeasible).unwrap();
            latest.sort_unstable();
            earliest.sort_unstable();
            for (e, l) in earliest.iter().zip(&latest) {
                assert!(e <= l, "earliest {earliest:?} vs latest {latest:?} for {set:?}");
            }
            if earliest != latest {
                strict += 1;
            }
        }
    }
    // The two directions genuinely differ; this is not a vacuous check.
    assert!(strict > 50, "directions differed on only {strict} sets");
}

/// A random single-market instance small enough for the exhaustive
/// min-cost oracle: co-located stations and clusters, so every station
/// covers every cluster.
fn tiny_scenario(rng: &mut ChaCha8Rng) -> Scenario {
    let types = vec![
        StationType {
            id: "off".into(),
            tech: TechClass::Off,
            sectors: 0,
            capacity: 0.0,
            radius_km: 0.0,
            cost: 0.0,
        },
        StationType {
            id: "3g".into(),
            tech: TechClass::ThreeG,
            sectors: 1,
            capacity: 100.0,
            radius_km: 5.0,
            cost: 1.0,
        },
        StationType {
            id: "lte1".into(),
            tech: TechClass::Lte,
            sectors: 1,
            capacity: 120.0,
            radius_km: 3.0,
            cost: 1.1,
        },
        StationType {
            id: "lte2".into(),
            tech: TechClass::Lte,
            sectors: 2,
            capacity: 240.0,
            radius_km: 3.0,
            cost: 2.0,
        },
    ];
    let (off, threeg, lte1, lte2) = (0usize, 1, 2, 3);
    let n_stations = rng.gen_range(2..=4usize);
    let horizon = rng.gen_range(3..=5u32);
    let stations: Vec<BaseStation> = (0..n_stations)
        .map(|b| {
            let legacy = rng.gen_bool(0.5);
            BaseStation {
                id: format!("b{b}"),
                x: 0.0,
                y: 0.0,
                initial_type: if legacy { threeg } else { lte1 },
                allowed_types: if legacy {
                    vec![off, threeg]
                } else {
                    vec![off, lte1, lte2]
                },
                owner: 0,
            }
        })
        .collect();
    let clusters = vec![SubscriberCluster {
        id: "c0".into(),
        x: 0.0,
        y: 0.0,
    }];
    // Demand starts safely within the initial capacity and grows by a
    // random factor; some draws end up infeasible, which is fine.
    let initial_cap: f64 = stations.iter().map(|s| types[s.initial_type].capacity).sum();
    let start = initial_cap * rng.gen_range(0.3..0.9);
    let growth = rng.gen_range(1.0..2.5f64);
    let demand: Vec<f64> = (1..=horizon)
        .map(|k| start * growth.powf((k - 1) as f64 / (horizon - 1).max(1) as f64))
        .collect();
    Scenario::new(
        types,
        stations,
        clusters,
        vec!["op1".into()],
        horizon,
        rng.gen_range(1..=2u32),
        1.0,
        1.0,
        demand,
        &[],
    )
    .expect("tiny instance is structurally sound")
}

#[test]
fn planner_cost_is_bounded_by_min_cost_oracle() {
    let budget = OracleBudget::default();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut compared = 0;
    for _ in 0..200 {
        let sc = tiny_scenario(&mut rng);
        let result = plan(&sc, Mode::Shared);
        let oracle = oracle_min_cost_plan(&sc, &budget).unwrap();
        if !result.is_success() {
            continue;
        }
        // The greedy plan is itself feasible, so the oracle must find one.
        let (best_cost, _) = oracle.expect("oracle misses a plan the greedy found");
        let traj = result.schedule.trajectory(&sc);
        let greedy_cost: f64 = (0..sc.stations.len())
            .map(|b| sc.cost(b, traj[b][sc.horizon as usize - 1]))
            .sum();
        assert!(
            greedy_cost >= best_cost - 1e-9,
            "greedy cost {greedy_cost} beats exhaustive optimum {best_cost}"
        );
        compared += 1;
    }
    assert!(compared > 100, "{compared} instances compared");
}
