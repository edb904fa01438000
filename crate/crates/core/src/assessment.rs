//! Served-capacity assessment and competition metrics.
//!
//! The planner never computes served traffic itself; it consumes an
//! [`Assessor`], a pluggable block that maps (topology, schedule,
//! demand) to sigma values. The default [`ProportionalAssessor`] gives
//! each active station its type's nominal capacity and splits it across
//! covered clusters proportionally to their demand; it is pure, additive
//! in stations, and monotone in station capacity, which is what the
//! planner's correctness argument needs.

use serde::{Deserialize, Serialize};

use crate::scenario::{ClusterIdx, OperatorIdx, Period, Scenario, Schedule, StationIdx, TypeIdx};

/// Planning mode: operators either pool their networks and demand, or
/// plan independently on their own stations and load.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Shared,
    Independent,
}

/// Demand selector of a network view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DemandView {
    /// Total demand over all operators (sharing mode, or market-wide
    /// aggregates).
    Total,
    /// A single operator's demand.
    Operator(OperatorIdx),
}

/// A sub-network to assess: a set of stations and the demand they serve.
#[derive(Debug, Clone)]
pub struct NetworkView {
    /// Ascending station indices.
    pub stations: Vec<StationIdx>,
    pub demand: DemandView,
}

impl NetworkView {
    /// The pooled view: every station, total demand.
    pub fn pooled(sc: &Scenario) -> Self {
        NetworkView {
            stations: (0..sc.stations.len()).collect(),
            demand: DemandView::Total,
        }
    }

    /// One operator's stations serving that operator's demand.
    pub fn operator(sc: &Scenario, o: OperatorIdx) -> Self {
        NetworkView {
            stations: (0..sc.stations.len())
                .filter(|&b| sc.stations[b].owner == o)
                .collect(),
            demand: DemandView::Operator(o),
        }
    }

    pub fn demand_at(&self, sc: &Scenario, c: ClusterIdx, k: Period) -> f64 {
        match self.demand {
            DemandView::Total => sc.total_demand(c, k),
            DemandView::Operator(o) => sc.demand(c, k, o),
        }
    }
}

/// The performance-assessment contract.
///
/// Implementations must be pure (equal inputs give equal outputs, bit
/// for bit) and additive per station: the served capacity of a cluster
/// is the sum of per-station contributions, taken in ascending station
/// order. Replacing a station's type with one of equal coverage and
/// greater-or-equal nominal capacity must never decrease any
/// contribution.
pub trait Assessor {
    /// Precomputed state for one (scenario, view) pair.
    type Ctx;

    fn prepare(&self, sc: &Scenario, view: &NetworkView) -> Self::Ctx;

    /// Clusters station `b` serves under type `t`, ascending.
    fn coverage<'a>(
        &self,
        sc: &'a Scenario,
        ctx: &'a Self::Ctx,
        b: StationIdx,
        t: TypeIdx,
    ) -> &'a [ClusterIdx];

    /// sigma(b, c, k) when station `b` has type `t`; zero when `c` is not
    /// covered.
    fn contribution(
        &self,
        sc: &Scenario,
        ctx: &Self::Ctx,
        b: StationIdx,
        t: TypeIdx,
        c: ClusterIdx,
        k: Period,
    ) -> f64;
}

/// Default allocator: station capacity split across covered clusters
/// proportionally to their demand in the view (equal split when all
/// covered demand is zero).
#[derive(Debug, Clone, Copy, Default)]
pub struct ProportionalAssessor;

pub struct ProportionalCtx {
    view: NetworkView,
    /// Sum of view demand over covered clusters, `[b * nt + t][k - 1]`,
    /// only filled for stations in the view.
    denom: Vec<f64>,
    horizon: usize,
    n_types: usize,
}

impl Assessor for ProportionalAssessor {
    type Ctx = ProportionalCtx;

    fn prepare(&self, sc: &Scenario, view: &NetworkView) -> ProportionalCtx {
        let nt = sc.types.len();
        let hor = sc.horizon as usize;
        let mut denom = vec![0.0; sc.stations.len() * nt * hor];
        for &b in &view.stations {
            for &t in &sc.stations[b].allowed_types {
                let cov = sc.coverage_of(b, t);
                for k in 1..=sc.horizon {
                    let mut sum = 0.0;
                    for &c in cov {
                        sum += view.demand_at(sc, c, k);
                    }
                    denom[(b * nt + t) * hor + k as usize - 1] = sum;
                }
            }
        }
        ProportionalCtx {
            view: view.clone(),
            denom,
            horizon: hor,
            n_types: nt,
        }
    }

    fn coverage<'a>(
        &self,
        sc: &'a Scenario,
        _ctx: &'a ProportionalCtx,
        b: StationIdx,
        t: TypeIdx,
    ) -> &'a [ClusterIdx] {
        sc.coverage_of(b, t)
    }

    fn contribution(
        &self,
        sc: &Scenario,
        ctx: &ProportionalCtx,
        b: StationIdx,
        t: TypeIdx,
        c: ClusterIdx,
        k: Period,
    ) -> f64 {
        let cap = sc.types[t].capacity;
        if cap == 0.0 {
            return 0.0;
        }
        let cov = sc.coverage_of(b, t);
        if cov.binary_search(&c).is_err() {
            return 0.0;
        }
        let denom = ctx.denom[(b * ctx.n_types + t) * ctx.horizon + k as usize - 1];
        if denom > 0.0 {
            cap * ctx.view.demand_at(sc, c, k) / denom
        } else {
            cap / cov.len() as f64
        }
    }
}

/// Served-capacity tensors for one period at every aggregation level the
/// planner and reports need.
#[derive(Debug, Clone)]
pub struct AssessmentResult {
    pub period: Period,
    /// sigma(c, k) per cluster.
    pub sigma_cluster: Vec<f64>,
    /// sigma(c, k, o), `[c * n_ops + o]`. Spare capacity stays in
    /// `sigma_cluster` and belongs to no operator.
    pub sigma_cluster_op: Vec<f64>,
    /// Non-zero sigma(b, c, k) entries per station.
    pub sigma_station_cluster: Vec<Vec<(ClusterIdx, f64)>>,
}

/// Runs the assessor on a view for one period.
pub fn assess_view<A: Assessor>(
    sc: &Scenario,
    view: &NetworkView,
    ctx: &A::Ctx,
    assessor: &A,
    schedule: &Schedule,
    k: Period,
) -> AssessmentResult {
    let traj = schedule.trajectory(sc);
    let mut sigma_cluster = vec![0.0; sc.clusters.len()];
    let mut sigma_station_cluster = vec![Vec::new(); sc.stations.len()];
    for &b in &view.stations {
        let t = traj[b][k as usize - 1];
        for &c in assessor.coverage(sc, ctx, b, t) {
            let s = assessor.contribution(sc, ctx, b, t, c, k);
            if s != 0.0 {
                sigma_station_cluster[b].push((c, s));
            }
        }
    }
    // Cluster totals in ascending station order, matching the planner's
    // incremental recomputation.
    for c in 0..sc.clusters.len() {
        let mut sum = 0.0;
        for &b in sc.candidate_stations(c) {
            if view.stations.binary_search(&b).is_err() {
                continue;
            }
            let t = traj[b][k as usize - 1];
            sum += assessor.contribution(sc, ctx, b, t, c, k);
        }
        sigma_cluster[c] = sum;
    }

    let n_ops = sc.operators.len();
    let mut sigma_cluster_op = vec![0.0; sc.clusters.len() * n_ops];
    for c in 0..sc.clusters.len() {
        let tau = view.demand_at(sc, c, k);
        if tau <= 0.0 {
            continue;
        }
        let served = sigma_cluster[c].min(tau);
        match view.demand {
            DemandView::Total => {
                for o in 0..n_ops {
                    sigma_cluster_op[c * n_ops + o] = served * sc.demand(c, k, o) / tau;
                }
            }
            DemandView::Operator(o) => {
                sigma_cluster_op[c * n_ops + o] = served;
            }
        }
    }

    AssessmentResult {
        period: k,
        sigma_cluster,
        sigma_cluster_op,
        sigma_station_cluster,
    }
}

/// Assesses the pooled network (all stations, total demand) for one
/// period with the default allocator semantics.
pub fn assess<A: Assessor>(
    sc: &Scenario,
    schedule: &Schedule,
    k: Period,
    assessor: &A,
) -> AssessmentResult {
    let view = NetworkView::pooled(sc);
    let ctx = assessor.prepare(sc, &view);
    assess_view(sc, &view, &ctx, assessor, schedule, k)
}

/// Local Herfindahl index of one (cluster, period) cell.
///
/// `tau_per_op` holds each market participant's demand; in sharing mode
/// callers pass the singleton joint operator. A zero-capacity cell is
/// defined-degenerate with value 1.0 and `degenerate` set. A spare share
/// that would be negative (demand above capacity, possible mid-planning)
/// is clamped to zero before squaring.
pub fn hhi(sigma: f64, tau_per_op: &[f64]) -> HhiValue {
    if sigma <= 0.0 {
        return HhiValue {
            value: 1.0,
            degenerate: true,
        };
    }
    let tau: f64 = tau_per_op.iter().sum();
    let spare = ((sigma - tau) / sigma).max(0.0);
    let mut h = spare * spare;
    for &t in tau_per_op {
        let share = t / sigma;
        h += share * share;
    }
    HhiValue {
        value: h,
        degenerate: false,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HhiValue {
    pub value: f64,
    /// True when sigma was zero and the maximal-concentration fallback
    /// applies.
    pub degenerate: bool,
}

/// Per-cluster HHI values and compliance for one period.
#[derive(Debug, Clone)]
pub struct HhiReport {
    pub period: Period,
    /// `(hhi, compliant)` per cluster; `None` for clusters excluded from
    /// the counted set (zero total demand).
    pub cells: Vec<Option<(f64, bool)>>,
    pub counted: usize,
    pub compliant: usize,
}

impl HhiReport {
    pub fn compliance_fraction(&self) -> f64 {
        if self.counted == 0 {
            1.0
        } else {
            self.compliant as f64 / self.counted as f64
        }
    }
}

/// Market sigma(c, k) per cluster for goal-2 purposes: the pooled
/// allocation in shared mode, the sum of per-operator allocations in
/// independent mode.
pub fn market_sigma<A: Assessor>(
    sc: &Scenario,
    schedule: &Schedule,
    k: Period,
    mode: Mode,
    assessor: &A,
) -> Vec<f64> {
    match mode {
        Mode::Shared => assess(sc, schedule, k, assessor).sigma_cluster,
        Mode::Independent => {
            let mut total = vec![0.0; sc.clusters.len()];
            for o in 0..sc.operators.len() {
                let view = NetworkView::operator(sc, o);
                let ctx = assessor.prepare(sc, &view);
                let res = assess_view(sc, &view, &ctx, assessor, schedule, k);
                for (acc, s) in total.iter_mut().zip(res.sigma_cluster) {
                    *acc += s;
                }
            }
            total
        }
    }
}

/// Builds the HHI report for one period. Zero-demand clusters are
/// excluded from the counted set (their HHI is identically 1 and would
/// make any ceiling below 1 unsatisfiable); covered-but-uncovered
/// demanded clusters count as non-compliant with H = 1.
pub fn hhi_report<A: Assessor>(
    sc: &Scenario,
    schedule: &Schedule,
    k: Period,
    mode: Mode,
    assessor: &A,
) -> HhiReport {
    let sigma = market_sigma(sc, schedule, k, mode, assessor);
    let mut cells = Vec::with_capacity(sc.clusters.len());
    let mut counted = 0;
    let mut compliant = 0;
    for c in 0..sc.clusters.len() {
        let tau = sc.total_demand(c, k);
        if tau <= 0.0 {
            cells.push(None);
            continue;
        }
        let h = match mode {
            Mode::Shared => hhi(sigma[c], &[tau]),
            Mode::Independent => {
                let per_op: Vec<f64> =
                    (0..sc.operators.len()).map(|o| sc.demand(c, k, o)).collect();
                hhi(sigma[c], &per_op)
            }
        };
        let ok = !h.degenerate && h.value <= sc.h_max;
        counted += 1;
        if ok {
            compliant += 1;
        }
        cells.push(Some((h.value, ok)));
    }
    HhiReport {
        period: k,
        cells,
        counted,
        compliant,
    }
}

/// Goal 1 violations of the pooled network: cells where some operator's
/// served share falls below its demand. Under the proportional operator
/// split this is exactly the set of cells with sigma(c, k) < tau(c, k).
pub fn goal1_violations(sc: &Scenario, schedule: &Schedule) -> Vec<(ClusterIdx, Period)> {
    let assessor = ProportionalAssessor;
    let view = NetworkView::pooled(sc);
    let ctx = assessor.prepare(sc, &view);
    let mut out = Vec::new();
    for k in 1..=sc.horizon {
        let res = assess_view(sc, &view, &ctx, &assessor, schedule, k);
        for c in 0..sc.clusters.len() {
            if res.sigma_cluster[c] < sc.total_demand(c, k) {
                out.push((c, k));
            }
        }
    }
    out
}

/// Goal 1 violations in independent mode: each operator's own network
/// must meet that operator's demand.
pub fn goal1_violations_independent(
    sc: &Scenario,
    schedule: &Schedule,
) -> Vec<(ClusterIdx, Period, OperatorIdx)> {
    let assessor = ProportionalAssessor;
    let mut out = Vec::new();
    for o in 0..sc.operators.len() {
        let view = NetworkView::operator(sc, o);
        let ctx = assessor.prepare(sc, &view);
        for k in 1..=sc.horizon {
            let res = assess_view(sc, &view, &ctx, &assessor, schedule, k);
            for c in 0..sc.clusters.len() {
                if res.sigma_cluster[c] < sc.demand(c, k, o) {
                    out.push((c, k, o));
                }
            }
        }
    }
    out
}

/// Goal 2 check for one period: fraction of counted clusters with HHI at
/// or below the ceiling, and whether it reaches phi.
pub fn goal2_satisfied(sc: &Scenario, schedule: &Schedule, k: Period, mode: Mode) -> (f64, bool) {
    let report = hhi_report(sc, schedule, k, mode, &ProportionalAssessor);
    let frac = report.compliance_fraction();
    (
        frac,
        report.compliant as f64 >= sc.phi * report.counted as f64,
    )
}
