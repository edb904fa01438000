//! Shared fixtures for the integration and acceptance tests.

use evoplan_core::{
    BaseStation, Change, Scenario, StationType, SubscriberCluster, TechClass,
};

/// The worked three-station example: two LTE stations upgraded just in
/// time for their clusters' growth and one legacy station decommissioned
/// as soon as the budget allows.
pub fn golden_scenario() -> Scenario {
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
            capacity: 100.0,
            radius_km: 3.0,
            cost: 1.0,
        },
        StationType {
            id: "lte2".into(),
            tech: TechClass::Lte,
            sectors: 2,
            capacity: 200.0,
            radius_km: 3.0,
            cost: 2.0,
        },
        StationType {
            id: "lte3".into(),
            tech: TechClass::Lte,
            sectors: 3,
            capacity: 300.0,
            radius_km: 3.0,
            cost: 3.0,
        },
    ];
    let (off, threeg, lte1, lte2, lte3) = (0, 1, 2, 3, 4);
    let stations = vec![
        BaseStation {
            id: "b1".into(),
            x: 0.0,
            y: 0.0,
            initial_type: lte1,
            allowed_types: vec![off, lte1, lte2, lte3],
            owner: 0,
        },
        BaseStation {
            id: "b2".into(),
            x: 10.0,
            y: 0.0,
            initial_type: lte1,
            allowed_types: vec![off, lte1, lte2],
            owner: 0,
        },
        BaseStation {
            id: "b3".into(),
            x: 20.0,
            y: 10.0,
            initial_type: threeg,
            allowed_types: vec![off, threeg],
            owner: 0,
        },
    ];
    let clusters = vec![
        SubscriberCluster {
            id: "c1".into(),
            x: 0.0,
            y: 0.0,
        },
        SubscriberCluster {
            id: "c2".into(),
            x: 10.0,
            y: 0.0,
        },
        SubscriberCluster {
            id: "c3".into(),
            x: 20.0,
            y: 10.0,
        },
    ];
    // demand[c][k][o], single operator, K = 4.
    let demand = vec![
        100.0, 150.0, 150.0, 250.0, // c1
        100.0, 150.0, 150.0, 150.0, // c2
        0.0, 0.0, 0.0, 0.0, // c3
    ];
    Scenario::new(
        types,
        stations,
        clusters,
        vec!["op1".into()],
        4,
        1,
        1.0,
        1.0,
        demand,
        &[],
    )
    .expect("golden instance is structurally sound")
}

/// A regulation-study instance: isolated single-site market cells with a
/// dominant and a secondary operator, both load-matched to their own
/// networks, and utilization ramping toward one over the horizon.
///
/// Design targets (exact, since cells do not interact):
/// - goals hold initially, so `h_max` ∈ {1.0, 0.8} require no changes;
/// - "duopoly 2:1" cells (even index) exceed an HHI of 0.5 only late in
///   the ramp, "duopoly 3:1" cells (odd index) exceed 0.5 earlier and
///   0.6 near the end;
/// - every violation is repairable by switching on an idle LTE overlay,
///   so the sweep 1.0 → 0.8 → 0.6 → 0.5 stays feasible while cost and
///   unused capacity rise strictly once the ceiling starts to bind.
#[allow(dead_code)]
pub fn regulation_scenario(h_max: f64) -> Scenario {
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
            id: "3g-a".into(),
            tech: TechClass::ThreeG,
            sectors: 1,
            capacity: 120.0,
            radius_km: 5.0,
            cost: 1.0,
        },
        StationType {
            id: "3g-b".into(),
            tech: TechClass::ThreeG,
            sectors: 1,
            capacity: 60.0,
            radius_km: 5.0,
            cost: 1.0,
        },
        StationType {
            id: "3g-c".into(),
            tech: TechClass::ThreeG,
            sectors: 1,
            capacity: 40.0,
            radius_km: 5.0,
            cost: 1.0,
        },
        StationType {
            id: "lte1".into(),
            tech: TechClass::Lte,
            sectors: 1,
            capacity: 60.0,
            radius_km: 3.0,
            cost: 1.2,
        },
        StationType {
            id: "lte2".into(),
            tech: TechClass::Lte,
            sectors: 2,
            capacity: 120.0,
            radius_km: 3.0,
            cost: 1.5,
        },
        StationType {
            id: "lte3".into(),
            tech: TechClass::Lte,
            sectors: 3,
            capacity: 180.0,
            radius_km: 3.0,
            cost: 1.8,
        },
    ];
    let (off, g_a, g_b, g_c, lte1, lte2, lte3) = (0, 1, 2, 3, 4, 5, 6);
    let horizon = 12u32;
    let cells = 24usize;

    let mut stations = Vec::new();
    let mut clusters = Vec::new();
    let mut demand = vec![0.0; cells * horizon as usize * 2];
    for i in 0..cells {
        let x = 20.0 * i as f64;
        clusters.push(SubscriberCluster {
            id: format!("c{i:02}"),
            x,
            y: 0.0,
        });
        // Operator shares 2:1 on even cells, 3:1 on odd cells, with the
        // legacy capacities matching the shares exactly.
        let (secondary, w1) = if i % 2 == 0 {
            (g_b, 2.0 / 3.0)
        } else {
            (g_c, 3.0 / 4.0)
        };
        stations.push(BaseStation {
            id: format!("s{i:02}g0"),
            x,
            y: 0.0,
            initial_type: g_a,
            allowed_types: vec![g_a, off],
            owner: 0,
        });
        stations.push(BaseStation {
            id: format!("s{i:02}g1"),
            x,
            y: 0.0,
            initial_type: secondary,
            allowed_types: vec![secondary, off],
            owner: 1,
        });
        for o in 0..2usize {
            stations.push(BaseStation {
                id: format!("s{i:02}l{o}"),
                x,
                y: 0.0,
                initial_type: off,
                allowed_types: vec![off, lte1, lte2, lte3],
                owner: o,
            });
        }
        let sigma0 = 120.0 + types[secondary].capacity;
        // Linear utilization ramp from a staggered start toward 0.99.
        let u0 = 0.72 + 0.015 * (i % 8) as f64;
        for k in 1..=horizon {
            let u = u0 + (0.99 - u0) * (k as f64 - 1.0) / (horizon as f64 - 1.0);
            let tau = u * sigma0;
            let idx = i * horizon as usize * 2 + (k as usize - 1) * 2;
            demand[idx] = tau * w1;
            demand[idx + 1] = tau * (1.0 - w1);
        }
    }

    Scenario::new(
        types,
        stations,
        clusters,
        vec!["op1".into(), "op2".into()],
        horizon,
        3,
        h_max,
        1.0,
        demand,
        &[],
    )
    .expect("regulation instance is structurally sound")
}

/// The expected golden schedule, sorted by (station, period).
pub fn golden_expected(sc: &Scenario) -> Vec<Change> {
    let b = |id: &str| sc.station_index(id).unwrap();
    let t = |id: &str| sc.type_index(id).unwrap();
    vec![
        Change {
            station: b("b1"),
            period: 2,
            to_type: t("lte2"),
        },
        Change {
            station: b("b1"),
            period: 4,
            to_type: t("lte3"),
        },
        Change {
            station: b("b2"),
            period: 1,
            to_type: t("lte2"),
        },
        Change {
            station: b("b3"),
            period: 3,
            to_type: t("off"),
        },
    ]
}
