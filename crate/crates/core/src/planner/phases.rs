//! The three planning phases: demand satisfaction, competition
//! compliance, and cost reduction.
//!
//! Every phase follows the same greedy skeleton: find the problem cells,
//! pick the most urgent one, pick the nearest station and most
//! appropriate capacity-preserving type change, and place it with the
//! deadline scheduler. Phase 3 drops the capacity-preserving restriction
//! and instead checks goals explicitly, reverting harmful changes.

use std::collections::{BTreeSet, HashSet};

use crate::assessment::Assessor;
use crate::scenario::{Change, ClusterIdx, Period, StationIdx, TypeIdx};

use super::engine::Engine;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Capacity,
    Competition,
    Cost,
}

impl Phase {
    pub fn name(self) -> &'static str {
        match self {
            Phase::Capacity => "capacity",
            Phase::Competition => "competition",
            Phase::Cost => "cost",
        }
    }
}

/// One planner decision, committed or reverted.
#[derive(Debug, Clone)]
pub enum PhaseEvent {
    Commit {
        phase: Phase,
        /// Problem cell that triggered the change, when one exists.
        cluster: Option<ClusterIdx>,
        deadline: Option<Period>,
        change: Change,
        from_type: TypeIdx,
    },
    Revert {
        phase: Phase,
        change: Change,
        reason: String,
    },
}

/// Legal type-change edges: anything active can switch off, an off
/// station can activate an LTE config, and LTE upgrades must add
/// sectors.
fn edge_legal(sc: &crate::scenario::Scenario, from: TypeIdx, to: TypeIdx) -> bool {
    use crate::scenario::TechClass;
    if to == sc.off_type {
        return from != sc.off_type;
    }
    match (sc.types[from].tech, sc.types[to].tech) {
        (TechClass::Off, TechClass::Lte) => true,
        (TechClass::Lte, TechClass::Lte) => sc.types[to].sectors > sc.types[from].sectors,
        _ => false,
    }
}

fn allowance_met(compliant: usize, counted: usize, phi: f64) -> bool {
    compliant as f64 >= phi * counted as f64
}

/// Incrementally maintained goal-2 compliance state, market-wide.
pub(crate) struct Goal2State {
    counted_at: Vec<usize>,
    viol_at: Vec<usize>,
    /// Violation flag per cell `[c * K + k - 1]`; only counted cells are
    /// meaningful.
    violating: Vec<bool>,
    counted: Vec<bool>,
}

impl Goal2State {
    pub fn new<A: Assessor>(engine: &Engine<'_, A>) -> Self {
        let sc = engine.sc;
        let hor = sc.horizon as usize;
        let mut s = Goal2State {
            counted_at: vec![0; hor],
            viol_at: vec![0; hor],
            violating: vec![false; sc.clusters.len() * hor],
            counted: vec![false; sc.clusters.len() * hor],
        };
        for c in 0..sc.clusters.len() {
            for k in 1..=sc.horizon {
                if let Some(ok) = engine.hhi_compliant(c, k) {
                    let i = c * hor + k as usize - 1;
                    s.counted[i] = true;
                    s.counted_at[k as usize - 1] += 1;
                    if !ok {
                        s.violating[i] = true;
                        s.viol_at[k as usize - 1] += 1;
                    }
                }
            }
        }
        s
    }

    /// Refreshes the listed cells after a schedule edit.
    pub fn update<A: Assessor>(
        &mut self,
        engine: &Engine<'_, A>,
        affected: &[(ClusterIdx, Period)],
    ) {
        let hor = engine.sc.horizon as usize;
        for &(c, k) in affected {
            let i = c * hor + k as usize - 1;
            if !self.counted[i] {
                continue;
            }
            let now = !engine.hhi_compliant(c, k).unwrap_or(true);
            if now != self.violating[i] {
                self.violating[i] = now;
                if now {
                    self.viol_at[k as usize - 1] += 1;
                } else {
                    self.viol_at[k as usize - 1] -= 1;
                }
            }
        }
    }

    pub fn satisfied(&self, k: Period, phi: f64) -> bool {
        let counted = self.counted_at[k as usize - 1];
        allowance_met(counted - self.viol_at[k as usize - 1], counted, phi)
    }

    pub fn is_violating(&self, c: ClusterIdx, k: Period, hor: usize) -> bool {
        self.violating[c * hor + k as usize - 1]
    }
}

/// Phase 1 for one budget group: schedule capacity-preserving changes
/// until served capacity meets demand at every (cluster, period) of the
/// group's view.
pub(crate) fn run_phase1<A: Assessor>(
    engine: &mut Engine<'_, A>,
    g: usize,
    events: &mut Vec<PhaseEvent>,
) -> Result<(), String> {
    let sc = engine.sc;
    let cap = 4 * sc.types.len() * sc.stations.len();
    let mut iterations = 0usize;

    let mut problems: BTreeSet<(Period, ClusterIdx)> = BTreeSet::new();
    for c in 0..sc.clusters.len() {
        for k in 1..=sc.horizon {
            if engine.sigma(g, c, k) < engine.demand(g, c, k) {
                problems.insert((k, c));
            }
        }
    }

    while let Some(&(k_star, c_star)) = problems.iter().next() {
        iterations += 1;
        if iterations > cap {
            return Err(format!(
                "phase 1 exceeded the iteration cap at cluster {} period {k_star}",
                sc.clusters[c_star].id
            ));
        }

        // Suitable actions: stations covering the cluster under a
        // capacity-preserving type change that strictly raises their
        // contribution to it.
        let mut per_station: Vec<(StationIdx, Vec<TypeIdx>)> = Vec::new();
        for &b in engine.groups[g].candidates[c_star].iter() {
            let t_cur = engine.type_at(b, k_star);
            let cur = contribution(engine, g, b, t_cur, c_star, k_star);
            let mut ts = Vec::new();
            for &t in &sc.stations[b].allowed_types {
                if t == t_cur
                    || !sc.covers(b, c_star, t)
                    || !engine.preserving(b, t_cur, t)
                    || !edge_legal(sc, t_cur, t)
                {
                    continue;
                }
                // An insertion before an already-scheduled change must
                // keep that later edge legal and capacity-preserving.
                if let Some((_, tn)) = engine.next_change_after(b, k_star) {
                    if !engine.preserving(b, t, tn) || !edge_legal(sc, t, tn) {
                        continue;
                    }
                }
                if contribution(engine, g, b, t, c_star, k_star) > cur {
                    ts.push(t);
                }
            }
            if !ts.is_empty() {
                per_station.push((b, ts));
            }
        }
        if per_station.is_empty() {
            return Err(format!(
                "no capacity-preserving action can serve cluster {} at period {k_star}",
                sc.clusters[c_star].id
            ));
        }
        per_station.sort_by(|a, b| {
            let da = sc.distance(a.0, c_star);
            let db = sc.distance(b.0, c_star);
            da.partial_cmp(&db).unwrap().then(a.0.cmp(&b.0))
        });

        let mut committed = false;
        for (b, ts) in &per_station {
            let b = *b;
            // Cheapest type restoring the demand constraint; when none
            // restores it fully, the one offering the most capacity.
            let tau = engine.demand(g, c_star, k_star);
            let restoring: Vec<TypeIdx> = ts
                .iter()
                .copied()
                .filter(|&t| engine.cell_sigma(g, c_star, k_star, Some((b, t))) >= tau)
                .collect();
            let t_star = if !restoring.is_empty() {
                *restoring
                    .iter()
                    .min_by(|&&x, &&y| {
                        sc.cost(b, x)
                            .partial_cmp(&sc.cost(b, y))
                            .unwrap()
                            .then(
                                sc.types[x]
                                    .capacity
                                    .partial_cmp(&sc.types[y].capacity)
                                    .unwrap(),
                            )
                            .then(x.cmp(&y))
                    })
                    .unwrap()
            } else {
                *ts.iter()
                    .max_by(|&&x, &&y| {
                        contribution(engine, g, b, x, c_star, k_star)
                            .partial_cmp(&contribution(engine, g, b, y, c_star, k_star))
                            .unwrap()
                            .then(y.cmp(&x))
                    })
                    .unwrap()
            };

            // Latest feasible slot no later than the deadline, after any
            // change the station already has on that stretch.
            let p_last = engine.last_change_up_to(b, k_star);
            let slot = (p_last + 1..=k_star)
                .rev()
                .find(|&h| engine.loads[g].has_slot(h));
            let Some(k_hat) = slot else { continue };

            let from_type = engine.type_at(b, k_hat);
            let ch = Change {
                station: b,
                period: k_hat,
                to_type: t_star,
            };
            let applied = engine.apply(ch);
            for &(c, k) in &applied.affected {
                if engine.sigma(g, c, k) < engine.demand(g, c, k) {
                    problems.insert((k, c));
                } else {
                    problems.remove(&(k, c));
                }
            }
            events.push(PhaseEvent::Commit {
                phase: Phase::Capacity,
                cluster: Some(c_star),
                deadline: Some(k_star),
                change: ch,
                from_type,
            });
            committed = true;
            break;
        }
        if !committed {
            return Err(format!(
                "change-rate budget exhausted before period {k_star} (cluster {})",
                sc.clusters[c_star].id
            ));
        }
    }
    Ok(())
}

fn contribution<A: Assessor>(
    engine: &Engine<'_, A>,
    g: usize,
    b: StationIdx,
    t: TypeIdx,
    c: ClusterIdx,
    k: Period,
) -> f64 {
    engine
        .assessor
        .contribution(engine.sc, &engine.groups[g].ctx, b, t, c, k)
}

/// Phase 2: capacity-preserving changes until, at every period, at least
/// a fraction phi of counted clusters have an HHI at or below the
/// ceiling. In independent mode the operator asked to upgrade rotates
/// round-robin.
pub(crate) fn run_phase2<A: Assessor>(
    engine: &mut Engine<'_, A>,
    events: &mut Vec<PhaseEvent>,
) -> Result<(), String> {
    let sc = engine.sc;
    let hor = sc.horizon as usize;
    let cap = 4 * sc.types.len() * sc.stations.len();
    let n_groups = engine.groups.len();
    let mut state = Goal2State::new(engine);
    let mut tried: HashSet<(ClusterIdx, Period, StationIdx, TypeIdx)> = HashSet::new();
    let mut rr = 0usize;
    let mut iterations = 0usize;

    loop {
        let bad: Vec<Period> =
            (1..=sc.horizon).filter(|&k| !state.satisfied(k, sc.phi)).collect();
        if bad.is_empty() {
            return Ok(());
        }
        iterations += 1;
        if iterations > cap {
            return Err(format!(
                "phase 2 exceeded the iteration cap (first unmet period {})",
                bad[0]
            ));
        }

        // Most urgent actionable violation: earliest unmet period, lowest
        // cluster id, first operator (from the round-robin point) with a
        // usable station.
        let mut action: Option<(ClusterIdx, Period, usize, StationIdx, TypeIdx)> = None;
        'search: for &k_star in &bad {
            for c_star in 0..sc.clusters.len() {
                if !state.is_violating(c_star, k_star, hor) {
                    continue;
                }
                for gi in 0..n_groups {
                    let g = (rr + gi) % n_groups;
                    let mut best: Option<(f64, StationIdx, TypeIdx, f64)> = None;
                    for &b in engine.groups[g].candidates[c_star].iter() {
                        let t_cur = engine.type_at(b, k_star);
                        let cur = contribution(engine, g, b, t_cur, c_star, k_star);
                        for &t in &sc.stations[b].allowed_types {
                            if t == t_cur
                                || !sc.covers(b, c_star, t)
                                || !engine.preserving(b, t_cur, t)
                                || !edge_legal(sc, t_cur, t)
                                || tried.contains(&(c_star, k_star, b, t))
                            {
                                continue;
                            }
                            if let Some((_, tn)) = engine.next_change_after(b, k_star) {
                                if !engine.preserving(b, t, tn) || !edge_legal(sc, t, tn) {
                                    continue;
                                }
                            }
                            let contrib = contribution(engine, g, b, t, c_star, k_star);
                            if contrib <= cur {
                                continue;
                            }
                            let d = sc.distance(b, c_star);
                            // Nearest station wins; within it, the type
                            // offering the highest capacity.
                            let better = match &best {
                                None => true,
                                Some((bd, bb, bt, bc)) => {
                                    let (bd, bb, bt, bc) = (*bd, *bb, *bt, *bc);
                                    (d, b) < (bd, bb)
                                        || ((d, b) == (bd, bb)
                                            && (contrib > bc || (contrib == bc && t < bt)))
                                }
                            };
                            if better {
                                best = Some((d, b, t, contrib));
                            }
                        }
                    }
                    if let Some((_, b, t, _)) = best {
                        action = Some((c_star, k_star, g, b, t));
                        break 'search;
                    }
                }
            }
        }
        let Some((c_star, k_star, g, b_star, t_star)) = action else {
            return Err(format!(
                "no capacity-preserving action can reduce the remaining HHI violations (first unmet period {})",
                bad[0]
            ));
        };

        let p_last = engine.last_change_up_to(b_star, k_star);
        let slot = (p_last + 1..=k_star)
            .rev()
            .find(|&h| engine.loads[g].has_slot(h));
        let Some(k_hat) = slot else {
            // No slot for this station; rule the action out and look for
            // another.
            tried.insert((c_star, k_star, b_star, t_star));
            continue;
        };

        let pre = engine.hhi_value(c_star, k_star);
        let from_type = engine.type_at(b_star, k_hat);
        let ch = Change {
            station: b_star,
            period: k_hat,
            to_type: t_star,
        };
        let applied = engine.apply(ch);
        state.update(engine, &applied.affected);
        let post = engine.hhi_value(c_star, k_star);
        if post < pre {
            events.push(PhaseEvent::Commit {
                phase: Phase::Competition,
                cluster: Some(c_star),
                deadline: Some(k_star),
                change: ch,
                from_type,
            });
            rr = (rr + 1) % n_groups;
        } else {
            let undone = engine.unapply(ch);
            state.update(engine, &undone.affected);
            tried.insert((c_star, k_star, b_star, t_star));
            events.push(PhaseEvent::Revert {
                phase: Phase::Competition,
                change: ch,
                reason: format!(
                    "did not lower the HHI of cluster {} at period {k_star}",
                    sc.clusters[c_star].id
                ),
            });
        }
    }
}

/// Phase 3: best-effort cost reduction. Candidates are sorted by the
/// savings their final-type change would yield, scheduled as early as
/// possible, and reverted whenever demand satisfaction, competition
/// compliance, coverage of a demanded cluster, or the savings themselves
/// fail to materialize.
pub(crate) fn run_phase3<A: Assessor>(
    engine: &mut Engine<'_, A>,
    events: &mut Vec<PhaseEvent>,
) {
    let sc = engine.sc;
    let hor = sc.horizon;
    let mut state = Goal2State::new(engine);
    let n_groups = engine.groups.len();

    for g in 0..n_groups {
        let mut cands: Vec<(f64, StationIdx, TypeIdx)> = Vec::new();
        for &b in &engine.groups[g].view.stations.clone() {
            let final_t = engine.type_at(b, hor);
            for &t in &sc.stations[b].allowed_types {
                if t == final_t {
                    continue;
                }
                let save = sc.cost(b, final_t) - sc.cost(b, t);
                if save > 0.0 {
                    cands.push((save, b, t));
                }
            }
        }
        cands.sort_by(|a, b| {
            b.0.partial_cmp(&a.0)
                .unwrap()
                .then(a.1.cmp(&b.1))
                .then(a.2.cmp(&b.2))
        });

        for (_, b, t) in cands {
            // The change redefines the station's final type, so it must
            // come after its last scheduled change and be a legal edge
            // from the current final type.
            let final_t = engine.type_at(b, hor);
            if t == final_t || !edge_legal(sc, final_t, t) {
                continue;
            }
            let after = engine.last_change_up_to(b, hor);
            let slot = (after + 1..=hor).find(|&h| engine.loads[g].has_slot(h));
            let Some(k_hat) = slot else { continue };
            let from_type = final_t;
            let ch = Change {
                station: b,
                period: k_hat,
                to_type: t,
            };
            let applied = engine.apply(ch);
            state.update(engine, &applied.affected);

            let mut reason = None;
            if applied.cost_delta >= 0.0 {
                reason = Some("yields no actual saving over the trajectory".to_string());
            }
            if reason.is_none() {
                for &(c, k) in &applied.affected {
                    if engine.sigma(g, c, k) < engine.demand(g, c, k) {
                        reason = Some(format!(
                            "breaks demand satisfaction at cluster {} period {k}",
                            sc.clusters[c].id
                        ));
                        break;
                    }
                    if sc.is_demanded(c) && engine.cover_count(c, k) == 0 {
                        reason = Some(format!(
                            "leaves demanded cluster {} uncovered at period {k}",
                            sc.clusters[c].id
                        ));
                        break;
                    }
                }
            }
            if reason.is_none() {
                let mut ks: Vec<Period> = applied.affected.iter().map(|&(_, k)| k).collect();
                ks.sort_unstable();
                ks.dedup();
                for k in ks {
                    if !state.satisfied(k, sc.phi) {
                        reason = Some(format!("breaks competition compliance at period {k}"));
                        break;
                    }
                }
            }

            match reason {
                None => events.push(PhaseEvent::Commit {
                    phase: Phase::Cost,
                    cluster: None,
                    deadline: None,
                    change: ch,
                    from_type,
                }),
                Some(reason) => {
                    let undone = engine.unapply(ch);
                    state.update(engine, &undone.affected);
                    events.push(PhaseEvent::Revert {
                        phase: Phase::Cost,
                        change: ch,
                        reason,
                    });
                }
            }
        }
    }
}
