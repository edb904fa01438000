//! Incremental planning state.
//!
//! The planning loop re-assesses after every committed change. Doing a
//! full reassessment each iteration would be quadratic in practice, so
//! the engine recomputes only the (cluster, period) cells a change can
//! touch; each cell is always rebuilt from scratch by summing station
//! contributions in ascending station order, which keeps the result
//! bitwise identical to a full reassessment.

use crate::assessment::{Assessor, Mode, NetworkView};
use crate::scenario::{
    Change, ClusterIdx, Period, Scenario, Schedule, StationIdx, TypeIdx,
};

use super::deadline::PeriodLoad;

pub(crate) struct Group<C> {
    pub view: NetworkView,
    pub ctx: C,
    /// sigma(c, k) of this view, `[c * K + k - 1]`.
    pub sigma: Vec<f64>,
    /// View demand tau(c, k), same layout.
    pub demand: Vec<f64>,
    /// Stations of this view covering each cluster under some allowed
    /// type, ascending.
    pub candidates: Vec<Vec<StationIdx>>,
}

/// Result of committing or removing one change.
pub(crate) struct Applied {
    /// Cells whose sigma (and hence goal status) may have changed.
    pub affected: Vec<(ClusterIdx, Period)>,
    /// Change in total integrated operating cost.
    pub cost_delta: f64,
}

pub(crate) struct Engine<'a, A: Assessor> {
    pub sc: &'a Scenario,
    pub assessor: &'a A,
    pub mode: Mode,
    pub groups: Vec<Group<A::Ctx>>,
    /// Budget group of each station (0 in shared mode, owner otherwise).
    pub station_group: Vec<usize>,
    /// Current type trajectory `[b][k - 1]`.
    pub traj: Vec<Vec<TypeIdx>>,
    pub schedule: Schedule,
    /// Per-group period occupancy against the change-rate budget.
    pub loads: Vec<PeriodLoad>,
    /// Number of stations covering each cluster under their current type,
    /// market-wide; `[c * K + k - 1]`.
    cover: Vec<u32>,
    /// Capacity-preserving predicate, `[b][t_orig][t_dest]` flattened.
    pi: Vec<bool>,
    /// Per-station changes sorted by period, mirroring `schedule`.
    station_changes: Vec<Vec<(Period, TypeIdx)>>,
}

impl<'a, A: Assessor> Engine<'a, A> {
    pub fn new(sc: &'a Scenario, mode: Mode, assessor: &'a A) -> Self {
        let hor = sc.horizon as usize;
        let nt = sc.types.len();

        let views: Vec<NetworkView> = match mode {
            Mode::Shared => vec![NetworkView::pooled(sc)],
            Mode::Independent => (0..sc.operators.len())
                .map(|o| NetworkView::operator(sc, o))
                .collect(),
        };
        let mut station_group = vec![0usize; sc.stations.len()];
        if mode == Mode::Independent {
            for (b, st) in sc.stations.iter().enumerate() {
                station_group[b] = st.owner;
            }
        }

        let traj: Vec<Vec<TypeIdx>> = sc
            .stations
            .iter()
            .map(|s| vec![s.initial_type; hor])
            .collect();

        let mut groups = Vec::with_capacity(views.len());
        for view in views {
            let ctx = assessor.prepare(sc, &view);
            let mut in_view = vec![false; sc.stations.len()];
            for &b in &view.stations {
                in_view[b] = true;
            }
            let candidates: Vec<Vec<StationIdx>> = (0..sc.clusters.len())
                .map(|c| {
                    sc.candidate_stations(c)
                        .iter()
                        .copied()
                        .filter(|&b| in_view[b])
                        .collect()
                })
                .collect();
            let mut demand = vec![0.0; sc.clusters.len() * hor];
            for c in 0..sc.clusters.len() {
                for k in 1..=sc.horizon {
                    demand[c * hor + k as usize - 1] = view.demand_at(sc, c, k);
                }
            }
            groups.push(Group {
                view,
                ctx,
                sigma: vec![0.0; sc.clusters.len() * hor],
                demand,
                candidates,
            });
        }

        // Capacity-preserving predicate per station over allowed pairs.
        let mut pi = vec![false; sc.stations.len() * nt * nt];
        for (b, st) in sc.stations.iter().enumerate() {
            for &to in &st.allowed_types {
                for &td in &st.allowed_types {
                    if sc.types[td].capacity < sc.types[to].capacity {
                        continue;
                    }
                    let co = sc.coverage_of(b, to);
                    let cd = sc.coverage_of(b, td);
                    let superset = co.iter().all(|c| cd.binary_search(c).is_ok());
                    pi[(b * nt + to) * nt + td] = superset;
                }
            }
        }

        let n = sc.change_rate;
        let loads = (0..groups.len())
            .map(|_| PeriodLoad::new(sc.horizon, n))
            .collect();

        let mut engine = Engine {
            sc,
            assessor,
            mode,
            groups,
            station_group,
            traj,
            schedule: Schedule::new(),
            loads,
            cover: vec![0; sc.clusters.len() * hor],
            pi,
            station_changes: vec![Vec::new(); sc.stations.len()],
        };
        engine.rebuild_all();
        engine
    }

    fn idx(&self, c: ClusterIdx, k: Period) -> usize {
        c * self.sc.horizon as usize + k as usize - 1
    }

    fn rebuild_all(&mut self) {
        for g in 0..self.groups.len() {
            for c in 0..self.sc.clusters.len() {
                for k in 1..=self.sc.horizon {
                    let v = self.cell_sigma(g, c, k, None);
                    let i = self.idx(c, k);
                    self.groups[g].sigma[i] = v;
                }
            }
        }
        for b in 0..self.sc.stations.len() {
            for k in 1..=self.sc.horizon {
                let t = self.traj[b][k as usize - 1];
                for &c in self.sc.coverage_of(b, t) {
                    let i = self.idx(c, k);
                    self.cover[i] += 1;
                }
            }
        }
    }

    /// Recomputes sigma of one cell from scratch, optionally with one
    /// station's type overridden (what-if evaluation).
    pub fn cell_sigma(
        &self,
        g: usize,
        c: ClusterIdx,
        k: Period,
        override_type: Option<(StationIdx, TypeIdx)>,
    ) -> f64 {
        let group = &self.groups[g];
        let mut sum = 0.0;
        for &b in &group.candidates[c] {
            let t = match override_type {
                Some((ob, ot)) if ob == b => ot,
                _ => self.traj[b][k as usize - 1],
            };
            sum += self
                .assessor
                .contribution(self.sc, &group.ctx, b, t, c, k);
        }
        sum
    }

    pub fn sigma(&self, g: usize, c: ClusterIdx, k: Period) -> f64 {
        self.groups[g].sigma[self.idx(c, k)]
    }

    pub fn demand(&self, g: usize, c: ClusterIdx, k: Period) -> f64 {
        self.groups[g].demand[self.idx(c, k)]
    }

    /// Market sigma: sum over groups in group order.
    pub fn market_sigma(&self, c: ClusterIdx, k: Period) -> f64 {
        let i = self.idx(c, k);
        self.groups.iter().map(|g| g.sigma[i]).sum()
    }

    pub fn cover_count(&self, c: ClusterIdx, k: Period) -> u32 {
        self.cover[self.idx(c, k)]
    }

    /// Capacity-preserving predicate pi(b, t_orig, t_dest).
    pub fn preserving(&self, b: StationIdx, t_orig: TypeIdx, t_dest: TypeIdx) -> bool {
        let nt = self.sc.types.len();
        self.pi[(b * nt + t_orig) * nt + t_dest]
    }

    pub fn type_at(&self, b: StationIdx, k: Period) -> TypeIdx {
        self.traj[b][k as usize - 1]
    }

    /// First scheduled change for `b` strictly after `k`, if any.
    pub fn next_change_after(&self, b: StationIdx, k: Period) -> Option<(Period, TypeIdx)> {
        self.station_changes[b].iter().copied().find(|&(p, _)| p > k)
    }

    /// Latest period with a scheduled change for `b` at or before `k`,
    /// or 0.
    pub fn last_change_up_to(&self, b: StationIdx, k: Period) -> Period {
        self.station_changes[b]
            .iter()
            .rev()
            .find(|&&(p, _)| p <= k)
            .map(|&(p, _)| p)
            .unwrap_or(0)
    }

    /// Commits a change: updates the schedule, budget occupancy,
    /// trajectory, coverage counts and the sigma cells it touches.
    pub fn apply(&mut self, ch: Change) -> Applied {
        self.schedule.push(ch);
        let pos = self.station_changes[ch.station]
            .binary_search_by_key(&ch.period, |&(p, _)| p)
            .unwrap_err();
        self.station_changes[ch.station].insert(pos, (ch.period, ch.to_type));
        self.loads[self.station_group[ch.station]].occupy(ch.period);
        self.resync_station(ch.station)
    }

    /// Reverts a previously committed change.
    pub fn unapply(&mut self, ch: Change) -> Applied {
        let removed = self.schedule.remove(ch);
        debug_assert!(removed);
        let pos = self.station_changes[ch.station]
            .binary_search_by_key(&ch.period, |&(p, _)| p)
            .expect("change present in index");
        self.station_changes[ch.station].remove(pos);
        self.loads[self.station_group[ch.station]].free(ch.period);
        self.resync_station(ch.station)
    }

    /// Rebuilds station `b`'s trajectory from its change list and
    /// refreshes every cell its type flips can affect.
    fn resync_station(&mut self, b: StationIdx) -> Applied {
        let hor = self.sc.horizon as usize;
        let mut new_row = vec![self.sc.stations[b].initial_type; hor];
        for &(p, t) in &self.station_changes[b] {
            for k in p as usize..=hor {
                new_row[k - 1] = t;
            }
        }

        let g = self.station_group[b];
        let mut affected: Vec<(ClusterIdx, Period)> = Vec::new();
        let mut cost_delta = 0.0;
        for k in 1..=self.sc.horizon {
            let old_t = self.traj[b][k as usize - 1];
            let new_t = new_row[k as usize - 1];
            if old_t == new_t {
                continue;
            }
            cost_delta += self.sc.cost(b, new_t) - self.sc.cost(b, old_t);
            for &c in self.sc.coverage_of(b, old_t) {
                let i = self.idx(c, k);
                self.cover[i] -= 1;
                affected.push((c, k));
            }
            for &c in self.sc.coverage_of(b, new_t) {
                let i = self.idx(c, k);
                self.cover[i] += 1;
                affected.push((c, k));
            }
        }
        self.traj[b] = new_row;
        affected.sort_unstable();
        affected.dedup();
        for &(c, k) in &affected {
            let v = self.cell_sigma(g, c, k, None);
            let i = self.idx(c, k);
            self.groups[g].sigma[i] = v;
        }
        Applied {
            affected,
            cost_delta,
        }
    }

    /// HHI compliance of one cell: `None` when the cluster has zero total
    /// demand at `k` (excluded from the counted set), otherwise whether
    /// its market HHI is at or below the ceiling.
    pub fn hhi_compliant(&self, c: ClusterIdx, k: Period) -> Option<bool> {
        let tau = self.sc.total_demand(c, k);
        if tau <= 0.0 {
            return None;
        }
        Some(self.hhi_value(c, k) <= self.sc.h_max)
    }

    /// Market HHI of one counted cell (1.0 when sigma is zero).
    pub fn hhi_value(&self, c: ClusterIdx, k: Period) -> f64 {
        let sigma = self.market_sigma(c, k);
        let h = match self.mode {
            Mode::Shared => crate::assessment::hhi(sigma, &[self.sc.total_demand(c, k)]),
            Mode::Independent => {
                let per_op: Vec<f64> = (0..self.sc.operators.len())
                    .map(|o| self.sc.demand(c, k, o))
                    .collect();
                crate::assessment::hhi(sigma, &per_op)
            }
        };
        h.value
    }
}
