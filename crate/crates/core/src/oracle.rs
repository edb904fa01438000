//! Brute-force reference implementations for certifying the planner on
//! small instances.
//!
//! Everything here is deliberately written from first principles —
//! plain exhaustive enumeration, no shared arithmetic with the planner
//! or the assessment engine beyond the domain types — so that agreement
//! between the two paths is meaningful evidence.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::OracleError;
use crate::scenario::{Change, Period, Scenario, Schedule, TypeIdx};

/// Size limits for the exhaustive searches. The enumerations are
/// exponential by design; the oracle refuses anything larger.
#[derive(Debug, Clone, Copy)]
pub struct OracleBudget {
    pub max_requests: usize,
    pub max_horizon: Period,
    pub max_stations: usize,
    pub max_clusters: usize,
}

impl Default for OracleBudget {
    fn default() -> Self {
        OracleBudget {
            max_requests: 8,
            max_horizon: 6,
            max_stations: 6,
            max_clusters: 8,
        }
    }
}

/// Exhaustively minimizes total lateness `sum(k* - k_hat)` over all
/// assignments of each request to a period `1..=deadline` with at most
/// `n` changes per period. Returns the optimum and one witness, or
/// `None` when no assignment exists.
pub fn oracle_schedule(
    deadlines: &[Period],
    n: u32,
    horizon: Period,
    budget: &OracleBudget,
) -> Result<Option<(u64, Vec<Period>)>, OracleError> {
    if deadlines.len() > budget.max_requests {
        return Err(OracleError::BudgetExceeded(format!(
            "{} requests (limit {})",
            deadlines.len(),
            budget.max_requests
        )));
    }
    if horizon > budget.max_horizon {
        return Err(OracleError::BudgetExceeded(format!(
            "horizon {horizon} (limit {})",
            budget.max_horizon
        )));
    }
    for &d in deadlines {
        if d < 1 || d > horizon {
            return Err(OracleError::BudgetExceeded(format!(
                "deadline {d} outside 1..={horizon}"
            )));
        }
    }

    let mut best: Option<(u64, Vec<Period>)> = None;
    let mut assignment = vec![0 as Period; deadlines.len()];
    let mut counts = vec![0u32; horizon as usize + 1];

    fn recurse(
        i: usize,
        deadlines: &[Period],
        n: u32,
        assignment: &mut Vec<Period>,
        counts: &mut Vec<u32>,
        lateness: u64,
        best: &mut Option<(u64, Vec<Period>)>,
    ) {
        if i == deadlines.len() {
            if best.as_ref().map_or(true, |(b, _)| lateness < *b) {
                *best = Some((lateness, assignment.clone()));
            }
            return;
        }
        for k in 1..=deadlines[i] {
            if counts[k as usize] >= n {
                continue;
            }
            counts[k as usize] += 1;
            assignment[i] = k;
            recurse(
                i + 1,
                deadlines,
                n,
                assignment,
                counts,
                lateness + (deadlines[i] - k) as u64,
                best,
            );
            counts[k as usize] -= 1;
        }
    }
    recurse(0, deadlines, n, &mut assignment, &mut counts, 0, &mut best);
    Ok(best)
}

/// The schedulability condition stated over sorted deadlines: the i-th
/// earliest deadline (1-based) must admit at least i slots before it,
/// i.e. `i <= deadline_i * n`. Equivalent to the prefix-count bound but
/// computed along a different route.
pub fn oracle_schedulable(deadlines: &[Period], n: u32) -> bool {
    let mut sorted = deadlines.to_vec();
    sorted.sort_unstable();
    sorted
        .iter()
        .enumerate()
        .all(|(i, &d)| (i as u64) < d as u64 * n as u64)
}

/// Rejection-samples `count` deadline multisets over `1..=k` that pass
/// the schedulability condition. Deterministic per seed.
pub fn oracle_feasible_sets(k: Period, n: u32, count: usize, seed: u64) -> Vec<Vec<Period>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let max_len = (k as u64 * n as u64).min(16) as usize;
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let len = rng.gen_range(0..=max_len);
        let set: Vec<Period> = (0..len).map(|_| rng.gen_range(1..=k)).collect();
        if oracle_schedulable(&set, n) {
            out.push(set);
        }
    }
    out
}

/// One candidate evolution of a single station: the chain of types it
/// passes through (excluding the initial one), every consecutive edge
/// legal in the change graph.
fn station_chains(sc: &Scenario, b: usize) -> Vec<Vec<TypeIdx>> {
    let st = &sc.stations[b];
    let legal = |from: TypeIdx, to: TypeIdx| -> bool {
        if to == sc.off_type {
            return from != sc.off_type;
        }
        use crate::scenario::TechClass;
        match (sc.types[from].tech, sc.types[to].tech) {
            (TechClass::Off, TechClass::Lte) => true,
            (TechClass::Lte, TechClass::Lte) => sc.types[to].sectors > sc.types[from].sectors,
            _ => false,
        }
    };
    // Chains need strictly increasing periods, so anything longer than
    // the horizon is unschedulable; the bound also cuts off/on cycles.
    let max_len = sc.horizon as usize;
    let mut chains = vec![Vec::new()];
    let mut frontier: Vec<Vec<TypeIdx>> = vec![Vec::new()];
    while let Some(chain) = frontier.pop() {
        let cur = *chain.last().unwrap_or(&st.initial_type);
        for &t in &st.allowed_types {
            if t != cur && legal(cur, t) {
                let mut next = chain.clone();
                next.push(t);
                chains.push(next.clone());
                if next.len() < max_len {
                    frontier.push(next);
                }
            }
        }
    }
    chains
}

/// Naive pooled served capacity of every (cluster, period) cell under a
/// fixed type trajectory: each active station splits its capacity across
/// the clusters it covers, proportionally to their total demand (equal
/// split when all of it is zero).
fn naive_sigma(sc: &Scenario, traj: &[Vec<TypeIdx>]) -> Vec<Vec<f64>> {
    let hor = sc.horizon as usize;
    let mut sigma = vec![vec![0.0; hor]; sc.clusters.len()];
    for k in 1..=sc.horizon {
        for b in 0..sc.stations.len() {
            let t = traj[b][k as usize - 1];
            let cap = sc.types[t].capacity;
            if cap <= 0.0 {
                continue;
            }
            let covered: Vec<usize> = (0..sc.clusters.len())
                .filter(|&c| sc.covers(b, c, t))
                .collect();
            if covered.is_empty() {
                continue;
            }
            let total: f64 = covered.iter().map(|&c| sc.total_demand(c, k)).sum();
            for &c in &covered {
                let share = if total > 0.0 {
                    sc.total_demand(c, k) / total
                } else {
                    1.0 / covered.len() as f64
                };
                sigma[c][k as usize - 1] += cap * share;
            }
        }
    }
    sigma
}

/// Market concentration of one cell, written straight from the
/// definition: squared spare-capacity share plus the squared demand
/// share of each operator.
fn naive_hhi(sigma: f64, per_op: &[f64]) -> f64 {
    if sigma <= 0.0 {
        return 1.0;
    }
    let tau: f64 = per_op.iter().sum();
    let spare = ((sigma - tau) / sigma).max(0.0);
    spare * spare + per_op.iter().map(|&t| (t / sigma) * (t / sigma)).sum::<f64>()
}

fn goals_hold(sc: &Scenario, traj: &[Vec<TypeIdx>]) -> bool {
    let sigma = naive_sigma(sc, traj);
    for k in 1..=sc.horizon {
        let mut counted = 0usize;
        let mut compliant = 0usize;
        for c in 0..sc.clusters.len() {
            let tau = sc.total_demand(c, k);
            let s = sigma[c][k as usize - 1];
            if s < tau {
                return false;
            }
            if tau > 0.0 {
                counted += 1;
                // Pooled market: one joint operator.
                if naive_hhi(s, &[tau]) <= sc.h_max {
                    compliant += 1;
                }
            }
        }
        if (compliant as f64) < sc.phi * counted as f64 {
            return false;
        }
    }
    true
}

/// Exhaustive minimum of the final-network cost over every legal type
/// trajectory and feasible schedule that satisfies the demand and
/// competition goals (pooled market). Returns the optimal cost with one
/// witness schedule, or `None` when no schedule satisfies the goals.
pub fn oracle_min_cost_plan(
    sc: &Scenario,
    budget: &OracleBudget,
) -> Result<Option<(f64, Schedule)>, OracleError> {
    if sc.stations.len() > budget.max_stations {
        return Err(OracleError::BudgetExceeded(format!(
            "{} stations (limit {})",
            sc.stations.len(),
            budget.max_stations
        )));
    }
    if sc.clusters.len() > budget.max_clusters {
        return Err(OracleError::BudgetExceeded(format!(
            "{} clusters (limit {})",
            sc.clusters.len(),
            budget.max_clusters
        )));
    }
    if sc.horizon > budget.max_horizon {
        return Err(OracleError::BudgetExceeded(format!(
            "horizon {} (limit {})",
            sc.horizon, budget.max_horizon
        )));
    }

    let hor = sc.horizon as usize;
    let chains: Vec<Vec<Vec<TypeIdx>>> =
        (0..sc.stations.len()).map(|b| station_chains(sc, b)).collect();

    struct Search<'a> {
        sc: &'a Scenario,
        chains: &'a [Vec<Vec<TypeIdx>>],
        counts: Vec<u32>,
        changes: Vec<Change>,
        best: Option<(f64, Schedule)>,
    }

    impl Search<'_> {
        fn leaf(&mut self) {
            let hor = self.sc.horizon as usize;
            let mut traj: Vec<Vec<TypeIdx>> = self
                .sc
                .stations
                .iter()
                .map(|s| vec![s.initial_type; hor])
                .collect();
            for ch in &self.changes {
                for k in ch.period as usize..=hor {
                    traj[ch.station][k - 1] = ch.to_type;
                }
            }
            if !goals_hold(self.sc, &traj) {
                return;
            }
            let cost: f64 = (0..self.sc.stations.len())
                .map(|b| self.sc.cost(b, traj[b][hor - 1]))
                .sum();
            if self.best.as_ref().map_or(true, |(b, _)| cost < *b) {
                let mut schedule = Schedule::new();
                for &ch in &self.changes {
                    schedule.push(ch);
                }
                self.best = Some((cost, schedule));
            }
        }

        /// Assigns strictly increasing periods to the remaining suffix of
        /// one station's chain, then moves on to the next station.
        fn place_chain(&mut self, b: usize, chain: &[TypeIdx], step: usize, min_k: Period) {
            if step == chain.len() {
                self.next_station(b + 1);
                return;
            }
            for k in min_k..=self.sc.horizon {
                if self.counts[k as usize] >= self.sc.change_rate {
                    continue;
                }
                self.counts[k as usize] += 1;
                self.changes.push(Change {
                    station: b,
                    period: k,
                    to_type: chain[step],
                });
                self.place_chain(b, chain, step + 1, k + 1);
                self.changes.pop();
                self.counts[k as usize] -= 1;
            }
        }

        fn next_station(&mut self, b: usize) {
            if b == self.sc.stations.len() {
                self.leaf();
                return;
            }
            let chains = self.chains;
            for chain in &chains[b] {
                self.place_chain(b, chain, 0, 1);
            }
        }
    }

    let mut search = Search {
        sc,
        chains: &chains,
        counts: vec![0; hor + 1],
        changes: Vec::new(),
        best: None,
    };
    search.next_station(0);
    Ok(search.best)
}
