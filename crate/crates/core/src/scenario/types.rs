//! Problem-instance data model: station types, base stations, subscriber
//! clusters, and the immutable [`Scenario`] they form.

use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;

/// Index of a base station within [`Scenario::stations`].
pub type StationIdx = usize;
/// Index of a subscriber cluster within [`Scenario::clusters`].
pub type ClusterIdx = usize;
/// Index of a station type within [`Scenario::types`].
pub type TypeIdx = usize;
/// Index of an operator within [`Scenario::operators`].
pub type OperatorIdx = usize;
/// 1-based planning period, `1..=K`.
pub type Period = u32;

/// Technology class of a station type, used to enforce the legal change
/// graph: 3G stations can only be decommissioned, LTE stations can only
/// gain sectors, and new LTE stations are created from the `off` state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TechClass {
    Off,
    #[serde(rename = "3g")]
    ThreeG,
    Lte,
}

/// A discrete technology/configuration state a base station can be in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationType {
    pub id: String,
    pub tech: TechClass,
    /// Sectorization level; orders LTE types for the change graph.
    #[serde(default)]
    pub sectors: u8,
    /// Traffic units deliverable per period (busy-hour Mbit).
    pub capacity: f64,
    /// Coverage radius in km; 0 means the type covers nothing.
    pub radius_km: f64,
    /// Operating cost per period.
    pub cost: f64,
}

/// A base station: fixed position, a current type, and the set of types it
/// may be changed to.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseStation {
    pub id: String,
    pub x: f64,
    pub y: f64,
    pub initial_type: TypeIdx,
    /// Types reachable for this station; always contains the off type.
    pub allowed_types: Vec<TypeIdx>,
    /// Owning operator; ignored in sharing mode.
    pub owner: OperatorIdx,
}

/// A spatial aggregate of users with per-operator, per-period demand.
#[derive(Debug, Clone, PartialEq)]
pub struct SubscriberCluster {
    pub id: String,
    pub x: f64,
    pub y: f64,
}

/// Per-station cost override for a specific type.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostOverride {
    pub station: String,
    #[serde(rename = "type")]
    pub type_id: String,
    pub cost: f64,
}

/// An immutable planning instance.
///
/// Coverage flags and distances are derived from positions and the type
/// table at construction time and never stored in scenario files.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub types: Vec<StationType>,
    pub off_type: TypeIdx,
    pub stations: Vec<BaseStation>,
    pub clusters: Vec<SubscriberCluster>,
    pub operators: Vec<String>,
    /// Number of planning periods K.
    pub horizon: Period,
    /// Maximum number of changes per period (per operator in independent
    /// mode).
    pub change_rate: u32,
    /// HHI ceiling in [0, 1].
    pub h_max: f64,
    /// Required fraction of compliant clusters in [0, 1].
    pub phi: f64,
    /// Flattened demand table, `[c][k][o]` with k zero-based internally.
    demand: Vec<f64>,
    /// Per-station cost table `[b][t]`, type cost with overrides applied.
    cost: Vec<f64>,
    /// Sorted covered-cluster lists per `(b, t)`.
    coverage: Vec<Vec<ClusterIdx>>,
    /// Stations that cover each cluster under at least one allowed type.
    candidates: Vec<Vec<StationIdx>>,
}

impl Scenario {
    /// Assembles a scenario and derives coverage, candidate lists and the
    /// effective cost table. Fails only on structural errors (bad indices,
    /// incomplete demand); semantic invariants are reported by
    /// [`validate`](crate::scenario::validate).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        types: Vec<StationType>,
        stations: Vec<BaseStation>,
        clusters: Vec<SubscriberCluster>,
        operators: Vec<String>,
        horizon: Period,
        change_rate: u32,
        h_max: f64,
        phi: f64,
        demand: Vec<f64>,
        cost_overrides: &[CostOverride],
    ) -> Result<Self, ScenarioError> {
        let off_type = types
            .iter()
            .position(|t| t.tech == TechClass::Off)
            .ok_or(ScenarioError::MissingOffType)?;
        if horizon < 1 {
            return Err(ScenarioError::BadHorizon(horizon));
        }
        let expected = clusters.len() * horizon as usize * operators.len();
        if demand.len() != expected {
            return Err(ScenarioError::DemandSize {
                expected,
                got: demand.len(),
            });
        }
        for b in &stations {
            if b.initial_type >= types.len() {
                return Err(ScenarioError::BadTypeIndex(b.id.clone()));
            }
            if b.allowed_types.iter().any(|&t| t >= types.len()) {
                return Err(ScenarioError::BadTypeIndex(b.id.clone()));
            }
            if b.owner >= operators.len() {
                return Err(ScenarioError::BadOperator(b.id.clone()));
            }
        }

        let mut cost = Vec::with_capacity(stations.len() * types.len());
        for b in &stations {
            for t in &types {
                let mut c = t.cost;
                for ov in cost_overrides {
                    if ov.station == b.id && ov.type_id == t.id {
                        c = ov.cost;
                    }
                }
                cost.push(c);
            }
        }

        let mut sc = Scenario {
            types,
            off_type,
            stations,
            clusters,
            operators,
            horizon,
            change_rate,
            h_max,
            phi,
            demand,
            cost,
            coverage: Vec::new(),
            candidates: Vec::new(),
        };
        sc.derive_coverage();
        Ok(sc)
    }

    /// Euclidean distance between station `b` and cluster `c` in km.
    pub fn distance(&self, b: StationIdx, c: ClusterIdx) -> f64 {
        let s = &self.stations[b];
        let u = &self.clusters[c];
        ((s.x - u.x).powi(2) + (s.y - u.y).powi(2)).sqrt()
    }

    /// Coverage flag gamma(b, c, t). The off type covers nothing.
    pub fn covers(&self, b: StationIdx, c: ClusterIdx, t: TypeIdx) -> bool {
        self.coverage[b * self.types.len() + t].binary_search(&c).is_ok()
    }

    /// Sorted clusters covered by station `b` under type `t`.
    pub fn coverage_of(&self, b: StationIdx, t: TypeIdx) -> &[ClusterIdx] {
        &self.coverage[b * self.types.len() + t]
    }

    /// Stations covering cluster `c` under at least one of their allowed
    /// types, ascending.
    pub fn candidate_stations(&self, c: ClusterIdx) -> &[StationIdx] {
        &self.candidates[c]
    }

    /// Demand tau(c, k, o); `k` is 1-based.
    pub fn demand(&self, c: ClusterIdx, k: Period, o: OperatorIdx) -> f64 {
        debug_assert!(k >= 1 && k <= self.horizon);
        self.demand
            [c * self.horizon as usize * self.operators.len()
                + (k as usize - 1) * self.operators.len()
                + o]
    }

    /// Total demand tau(c, k) summed over operators.
    pub fn total_demand(&self, c: ClusterIdx, k: Period) -> f64 {
        (0..self.operators.len()).map(|o| self.demand(c, k, o)).sum()
    }

    #[cfg(test)]
    pub(crate) fn set_demand_for_test(&mut self, c: ClusterIdx, k: Period, o: OperatorIdx, v: f64) {
        let i = c * self.horizon as usize * self.operators.len()
            + (k as usize - 1) * self.operators.len()
            + o;
        self.demand[i] = v;
    }

    /// Operating cost kappa(b, t) with per-station overrides applied.
    pub fn cost(&self, b: StationIdx, t: TypeIdx) -> f64 {
        self.cost[b * self.types.len() + t]
    }

    /// True if the cluster has positive demand at any period for any
    /// operator.
    pub fn is_demanded(&self, c: ClusterIdx) -> bool {
        let per = self.horizon as usize * self.operators.len();
        self.demand[c * per..(c + 1) * per].iter().any(|&d| d > 0.0)
    }

    pub fn type_index(&self, id: &str) -> Option<TypeIdx> {
        self.types.iter().position(|t| t.id == id)
    }

    pub fn station_index(&self, id: &str) -> Option<StationIdx> {
        self.stations.iter().position(|b| b.id == id)
    }

    pub fn cluster_index(&self, id: &str) -> Option<ClusterIdx> {
        self.clusters.iter().position(|c| c.id == id)
    }

    pub fn operator_index(&self, id: &str) -> Option<OperatorIdx> {
        self.operators.iter().position(|o| o == id)
    }

    fn derive_coverage(&mut self) {
        let nt = self.types.len();
        // Bucket clusters on a grid keyed by the largest radius so each
        // station only scans nearby cells.
        let max_r = self
            .types
            .iter()
            .map(|t| t.radius_km)
            .fold(0.0_f64, f64::max)
            .max(1e-9);
        let cell = max_r;
        let key = |x: f64, y: f64| ((x / cell).floor() as i64, (y / cell).floor() as i64);
        let mut grid: std::collections::HashMap<(i64, i64), Vec<ClusterIdx>> =
            std::collections::HashMap::new();
        for (c, cl) in self.clusters.iter().enumerate() {
            grid.entry(key(cl.x, cl.y)).or_default().push(c);
        }

        self.coverage = vec![Vec::new(); self.stations.len() * nt];
        for (b, st) in self.stations.iter().enumerate() {
            let (gx, gy) = key(st.x, st.y);
            let mut near: Vec<ClusterIdx> = Vec::new();
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(v) = grid.get(&(gx + dx, gy + dy)) {
                        near.extend_from_slice(v);
                    }
                }
            }
            near.sort_unstable();
            for (t, ty) in self.types.iter().enumerate() {
                if ty.radius_km <= 0.0 {
                    continue;
                }
                let list: Vec<ClusterIdx> = near
                    .iter()
                    .copied()
                    .filter(|&c| self.dist_sq(b, c) <= ty.radius_km * ty.radius_km)
                    .collect();
                self.coverage[b * nt + t] = list;
            }
        }

        self.candidates = vec![Vec::new(); self.clusters.len()];
        for (b, st) in self.stations.iter().enumerate() {
            let mut seen: Vec<ClusterIdx> = Vec::new();
            for &t in &st.allowed_types {
                seen.extend_from_slice(&self.coverage[b * nt + t]);
            }
            seen.sort_unstable();
            seen.dedup();
            for c in seen {
                self.candidates[c].push(b);
            }
        }
        // Station order within each candidate list fixes the summation
        // order of the allocator; keep it ascending.
        for v in &mut self.candidates {
            v.sort_unstable();
        }
    }

    fn dist_sq(&self, b: StationIdx, c: ClusterIdx) -> f64 {
        let s = &self.stations[b];
        let u = &self.clusters[c];
        (s.x - u.x).powi(2) + (s.y - u.y).powi(2)
    }
}

/// One scheduled type change: `x(b, k, t) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Change {
    pub station: StationIdx,
    pub period: Period,
    pub to_type: TypeIdx,
}

/// The decision variables of a plan: a set of type changes.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schedule {
    changes: Vec<Change>,
}

impl Schedule {
    pub fn new() -> Self {
        Schedule::default()
    }

    pub fn changes(&self) -> &[Change] {
        &self.changes
    }

    pub fn push(&mut self, ch: Change) {
        self.changes.push(ch);
    }

    /// Removes a change previously added with [`push`](Self::push).
    pub fn remove(&mut self, ch: Change) -> bool {
        if let Some(i) = self.changes.iter().position(|&c| c == ch) {
            self.changes.remove(i);
            true
        } else {
            false
        }
    }

    pub fn is_empty(&self) -> bool {
        self.changes.is_empty()
    }

    pub fn len(&self) -> usize {
        self.changes.len()
    }

    /// Number of changes at period `k`, over all stations.
    pub fn count_at(&self, k: Period) -> usize {
        self.changes.iter().filter(|c| c.period == k).count()
    }

    /// Type of station `b` at period `k` (1-based), the left-fold of its
    /// changes over the initial type. `k = 0` yields the initial type.
    pub fn type_at(&self, scenario: &Scenario, b: StationIdx, k: Period) -> TypeIdx {
        let mut ty = scenario.stations[b].initial_type;
        let mut last = 0;
        for c in &self.changes {
            if c.station == b && c.period <= k && c.period >= last {
                ty = c.to_type;
                last = c.period;
            }
        }
        ty
    }

    /// Dense type trajectory `[b][k-1]` for every station and period.
    pub fn trajectory(&self, scenario: &Scenario) -> Vec<Vec<TypeIdx>> {
        let hor = scenario.horizon as usize;
        let mut traj: Vec<Vec<TypeIdx>> = scenario
            .stations
            .iter()
            .map(|s| vec![s.initial_type; hor])
            .collect();
        let mut sorted: Vec<&Change> = self.changes.iter().collect();
        sorted.sort_by_key(|c| c.period);
        for ch in sorted {
            for k in ch.period as usize..=hor {
                traj[ch.station][k - 1] = ch.to_type;
            }
        }
        traj
    }

    /// Total operating cost integrated over the whole horizon.
    pub fn total_cost(&self, scenario: &Scenario) -> f64 {
        let traj = self.trajectory(scenario);
        let mut sum = 0.0;
        for (b, row) in traj.iter().enumerate() {
            for &t in row {
                sum += scenario.cost(b, t);
            }
        }
        sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_types() -> Vec<StationType> {
        vec![
            StationType {
                id: "off".into(),
                tech: TechClass::Off,
                sectors: 0,
                capacity: 0.0,
                radius_km: 0.0,
                cost: 0.0,
            },
            StationType {
                id: "lte1".into(),
                tech: TechClass::Lte,
                sectors: 1,
                capacity: 100.0,
                radius_km: 2.0,
                cost: 1.0,
            },
            StationType {
                id: "lte2".into(),
                tech: TechClass::Lte,
                sectors: 2,
                capacity: 200.0,
                radius_km: 2.5,
                cost: 2.0,
            },
        ]
    }

    fn two_station_scenario() -> Scenario {
        let stations = vec![
            BaseStation {
                id: "b1".into(),
                x: 0.0,
                y: 0.0,
                initial_type: 1,
                allowed_types: vec![0, 1, 2],
                owner: 0,
            },
            BaseStation {
                id: "b2".into(),
                x: 5.0,
                y: 0.0,
                initial_type: 0,
                allowed_types: vec![0, 1, 2],
                owner: 0,
            },
        ];
        let clusters = vec![
            SubscriberCluster {
                id: "c1".into(),
                x: 1.0,
                y: 0.0,
            },
            SubscriberCluster {
                id: "c2".into(),
                x: 5.0,
                y: 1.0,
            },
        ];
        Scenario::new(
            small_types(),
            stations,
            clusters,
            vec!["op1".into()],
            3,
            2,
            1.0,
            1.0,
            vec![10.0, 10.0, 10.0, 5.0, 5.0, 5.0],
            &[],
        )
        .unwrap()
    }

    #[test]
    fn coverage_follows_radius() {
        let sc = two_station_scenario();
        // b1 under lte1 (radius 2): covers c1 (distance 1) only.
        assert!(sc.covers(0, 0, 1));
        assert!(!sc.covers(0, 1, 1));
        // Off type covers nothing.
        assert!(sc.coverage_of(0, 0).is_empty());
        // b2 under lte1: c2 at distance 1.
        assert!(sc.covers(1, 1, 1));
        assert!(!sc.covers(1, 0, 1));
    }

    #[test]
    fn candidate_stations_are_sorted_and_complete() {
        let sc = two_station_scenario();
        assert_eq!(sc.candidate_stations(0), &[0]);
        assert_eq!(sc.candidate_stations(1), &[1]);
    }

    #[test]
    fn schedule_trajectory_left_folds_changes() {
        let sc = two_station_scenario();
        let mut sched = Schedule::new();
        sched.push(Change {
            station: 0,
            period: 2,
            to_type: 2,
        });
        sched.push(Change {
            station: 1,
            period: 3,
            to_type: 1,
        });
        let traj = sched.trajectory(&sc);
        assert_eq!(traj[0], vec![1, 2, 2]);
        assert_eq!(traj[1], vec![0, 0, 1]);
        assert_eq!(sched.type_at(&sc, 0, 1), 1);
        assert_eq!(sched.type_at(&sc, 0, 3), 2);
        // Cost: b1 1+2+2, b2 0+0+1.
        assert_eq!(sched.total_cost(&sc), 6.0);
    }

    #[test]
    fn cost_overrides_apply_per_station() {
        let stations = vec![BaseStation {
            id: "b1".into(),
            x: 0.0,
            y: 0.0,
            initial_type: 1,
            allowed_types: vec![0, 1],
            owner: 0,
        }];
        let clusters = vec![SubscriberCluster {
            id: "c1".into(),
            x: 0.0,
            y: 0.0,
        }];
        let overrides = vec![CostOverride {
            station: "b1".into(),
            type_id: "lte1".into(),
            cost: 7.5,
        }];
        let sc = Scenario::new(
            small_types(),
            stations,
            clusters,
            vec!["op1".into()],
            1,
            1,
            1.0,
            1.0,
            vec![10.0],
            &overrides,
        )
        .unwrap();
        assert_eq!(sc.cost(0, 1), 7.5);
        assert_eq!(sc.cost(0, 2), 2.0);
    }

    #[test]
    fn structural_errors_are_reported() {
        let err = Scenario::new(
            vec![small_types()[1].clone()],
            vec![],
            vec![],
            vec!["op1".into()],
            1,
            1,
            1.0,
            1.0,
            vec![],
            &[],
        );
        assert!(matches!(err, Err(crate::error::ScenarioError::MissingOffType)));
    }

    proptest! {
        /// Derived coverage agrees with the quadratic brute force.
        #[test]
        fn coverage_matches_brute_force(
            xs in proptest::collection::vec((0.0f64..20.0, 0.0f64..20.0), 1..8),
            cs in proptest::collection::vec((0.0f64..20.0, 0.0f64..20.0), 1..20),
        ) {
            let types = small_types();
            let stations: Vec<BaseStation> = xs
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| BaseStation {
                    id: format!("b{i}"),
                    x,
                    y,
                    initial_type: 1,
                    allowed_types: vec![0, 1, 2],
                    owner: 0,
                })
                .collect();
            let clusters: Vec<SubscriberCluster> = cs
                .iter()
                .enumerate()
                .map(|(i, &(x, y))| SubscriberCluster {
                    id: format!("c{i}"),
                    x,
                    y,
                })
                .collect();
            let demand = vec![0.0; clusters.len()];
            let sc = Scenario::new(
                types.clone(),
                stations,
                clusters,
                vec!["op1".into()],
                1,
                1,
                1.0,
                1.0,
                demand,
                &[],
            )
            .unwrap();
            for b in 0..xs.len() {
                for c in 0..cs.len() {
                    for t in 0..types.len() {
                        let d2 = (xs[b].0 - cs[c].0).powi(2) + (xs[b].1 - cs[c].1).powi(2);
                        let r = types[t].radius_km;
                        let expected = r > 0.0 && d2 <= r * r;
                        prop_assert_eq!(sc.covers(b, c, t), expected);
                    }
                }
            }
        }
    }
}
