//! The three-phase evolution planner.
//!
//! Phase 1 schedules capacity-preserving type changes until served
//! capacity meets demand everywhere; phase 2 does the same for HHI
//! compliance; phase 3 opportunistically swaps in cheaper types wherever
//! that does not break the first two goals. Phases 1 and 2 can fail
//! (budget or action exhaustion); phase 3 is best-effort and cannot.

pub mod deadline;
mod engine;
mod phases;

pub use deadline::{
    check_necessary, find_slot, greedy_deadline_schedule, greedy_with_direction,
    schedule_change, ChangeRequest, Direction, PeriodLoad,
};
pub use phases::{Phase, PhaseEvent};

use crate::assessment::{Assessor, Mode, ProportionalAssessor};
use crate::scenario::{Scenario, Schedule, TypeIdx};

use engine::Engine;

/// Terminal planner state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PlanStatus {
    Success,
    /// A mandatory phase could not reach its goal. The schedule in the
    /// result is the partial plan built up to that point.
    Infeasible { phase: Phase, reason: String },
}

/// Decision counts over the final schedule, split by what each change
/// does to the station.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DecisionCounts {
    /// Changes activating a previously-off station.
    pub creations: usize,
    /// Type changes between two active types.
    pub enhancements: usize,
    /// Changes switching a station off.
    pub decommissions: usize,
}

#[derive(Debug, Clone)]
pub struct PlanResult {
    pub schedule: Schedule,
    pub events: Vec<PhaseEvent>,
    pub status: PlanStatus,
    pub counts: DecisionCounts,
    /// Total integrated operating cost of the planned trajectory.
    pub total_cost: f64,
}

impl PlanResult {
    pub fn is_success(&self) -> bool {
        self.status == PlanStatus::Success
    }
}

/// Classifies the final schedule's changes into creations, enhancements
/// and decommissions by replaying the type trajectory.
pub fn count_decisions(sc: &Scenario, schedule: &Schedule) -> DecisionCounts {
    let mut counts = DecisionCounts::default();
    let mut changes = schedule.changes().to_vec();
    changes.sort_by_key(|ch| (ch.station, ch.period));
    let mut cur: Vec<TypeIdx> = sc.stations.iter().map(|s| s.initial_type).collect();
    for ch in changes {
        let from = cur[ch.station];
        if from == ch.to_type {
            continue;
        }
        if from == sc.off_type {
            counts.creations += 1;
        } else if ch.to_type == sc.off_type {
            counts.decommissions += 1;
        } else {
            counts.enhancements += 1;
        }
        cur[ch.station] = ch.to_type;
    }
    counts
}

/// Runs all three phases with the given assessor and returns the final
/// schedule. Deterministic: identical inputs give identical output.
pub fn plan_with<A: Assessor>(sc: &Scenario, mode: Mode, assessor: &A) -> PlanResult {
    let mut engine = Engine::new(sc, mode, assessor);
    let mut events = Vec::new();

    for g in 0..engine.groups.len() {
        if let Err(reason) = phases::run_phase1(&mut engine, g, &mut events) {
            return finish(
                sc,
                engine,
                events,
                PlanStatus::Infeasible {
                    phase: Phase::Capacity,
                    reason,
                },
            );
        }
    }
    if let Err(reason) = phases::run_phase2(&mut engine, &mut events) {
        return finish(
            sc,
            engine,
            events,
            PlanStatus::Infeasible {
                phase: Phase::Competition,
                reason,
            },
        );
    }
    phases::run_phase3(&mut engine, &mut events);
    finish(sc, engine, events, PlanStatus::Success)
}

/// [`plan_with`] using the default proportional assessor.
pub fn plan(sc: &Scenario, mode: Mode) -> PlanResult {
    plan_with(sc, mode, &ProportionalAssessor)
}

fn finish<A: Assessor>(
    sc: &Scenario,
    engine: Engine<'_, A>,
    events: Vec<PhaseEvent>,
    status: PlanStatus,
) -> PlanResult {
    let schedule = engine.schedule;
    let counts = count_decisions(sc, &schedule);
    let total_cost = schedule.total_cost(sc);
    PlanResult {
        schedule,
        events,
        status,
        counts,
        total_cost,
    }
}

/// Structural legality of a schedule against a scenario: per-period
/// budgets, one change per station and period, destination types allowed,
/// and change-graph edges only. Returns human-readable violations.
pub fn validate_schedule(sc: &Scenario, schedule: &Schedule, mode: Mode) -> Vec<String> {
    let mut out = Vec::new();
    let groups = match mode {
        Mode::Shared => 1,
        Mode::Independent => sc.operators.len(),
    };
    let mut per_period = vec![vec![0u32; sc.horizon as usize]; groups];
    let mut seen = std::collections::HashSet::new();
    for ch in schedule.changes() {
        if ch.station >= sc.stations.len() {
            out.push(format!("change references unknown station index {}", ch.station));
            continue;
        }
        let st = &sc.stations[ch.station];
        if ch.period < 1 || ch.period > sc.horizon {
            out.push(format!(
                "station {}: change at period {} outside 1..={}",
                st.id, ch.period, sc.horizon
            ));
            continue;
        }
        if !st.allowed_types.contains(&ch.to_type) {
            out.push(format!(
                "station {}: destination type {} not allowed",
                st.id, sc.types[ch.to_type].id
            ));
        }
        if !seen.insert((ch.station, ch.period)) {
            out.push(format!(
                "station {}: more than one change at period {}",
                st.id, ch.period
            ));
        }
        let g = match mode {
            Mode::Shared => 0,
            Mode::Independent => st.owner,
        };
        per_period[g][ch.period as usize - 1] += 1;
    }
    for (g, counts) in per_period.iter().enumerate() {
        for (i, &n) in counts.iter().enumerate() {
            if n > sc.change_rate {
                out.push(match mode {
                    Mode::Shared => format!(
                        "period {}: {} changes exceed the budget of {}",
                        i + 1,
                        n,
                        sc.change_rate
                    ),
                    Mode::Independent => format!(
                        "operator {} period {}: {} changes exceed the budget of {}",
                        sc.operators[g],
                        i + 1,
                        n,
                        sc.change_rate
                    ),
                });
            }
        }
    }
    out
}
