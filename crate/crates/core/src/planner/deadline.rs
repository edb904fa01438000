//! Deadline scheduling under the per-period change budget.
//!
//! A change request carries a deadline k*: the latest period by which the
//! change must be active. Phases 1 and 2 place changes as late as
//! possible (capacity deployed no earlier than needed); phase 3 places
//! cost-saving changes as early as possible.

use crate::scenario::{Period, Schedule, StationIdx, TypeIdx};

/// Placement direction for a change request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Latest period `<= deadline` with spare budget (phases 1-2).
    LatestFeasible,
    /// Earliest period in `1..=K` with spare budget (phase 3).
    EarliestFeasible,
}

/// The unit flowing from problem detection to the deadline scheduler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChangeRequest {
    pub station: StationIdx,
    pub to_type: TypeIdx,
    /// Latest period by which the change must be active, `1..=K`.
    pub deadline: Period,
    pub direction: Direction,
}

/// Necessary schedulability condition on a deadline multiset: the number
/// of changes due by period k can never exceed `k * N`. Returns the first
/// violated period on failure.
pub fn check_necessary(deadlines: &[Period], n: u32, horizon: Period) -> Result<(), Period> {
    let mut due = vec![0u64; horizon as usize + 1];
    for &d in deadlines {
        debug_assert!(d >= 1 && d <= horizon);
        due[d as usize] += 1;
    }
    let mut prefix = 0u64;
    for k in 1..=horizon {
        prefix += due[k as usize];
        if prefix > k as u64 * n as u64 {
            return Err(k);
        }
    }
    Ok(())
}

/// Per-period occupancy used when probing for a free slot.
#[derive(Debug, Clone)]
pub struct PeriodLoad {
    counts: Vec<u32>,
    n: u32,
}

impl PeriodLoad {
    pub fn new(horizon: Period, n: u32) -> Self {
        PeriodLoad {
            counts: vec![0; horizon as usize],
            n,
        }
    }

    pub fn from_schedule(schedule: &Schedule, horizon: Period, n: u32) -> Self {
        let mut load = PeriodLoad::new(horizon, n);
        for ch in schedule.changes() {
            load.occupy(ch.period);
        }
        load
    }

    pub fn count(&self, k: Period) -> u32 {
        self.counts[k as usize - 1]
    }

    pub fn has_slot(&self, k: Period) -> bool {
        self.count(k) < self.n
    }

    pub fn occupy(&mut self, k: Period) {
        self.counts[k as usize - 1] += 1;
    }

    pub fn free(&mut self, k: Period) {
        debug_assert!(self.counts[k as usize - 1] > 0);
        self.counts[k as usize - 1] -= 1;
    }

    pub fn horizon(&self) -> Period {
        self.counts.len() as Period
    }
}

/// Finds the slot for a request without mutating anything; the caller
/// commits. Returns `None` when every candidate period is full.
pub fn find_slot(load: &PeriodLoad, request: &ChangeRequest) -> Option<Period> {
    match request.direction {
        Direction::LatestFeasible => (1..=request.deadline).rev().find(|&k| load.has_slot(k)),
        Direction::EarliestFeasible => (1..=load.horizon()).find(|&k| load.has_slot(k)),
    }
}

/// High-level entry point over a concrete schedule: returns the chosen
/// period or `None` (no slot).
pub fn schedule_change(
    schedule: &Schedule,
    request: &ChangeRequest,
    n: u32,
    horizon: Period,
) -> Option<Period> {
    let load = PeriodLoad::from_schedule(schedule, horizon, n);
    find_slot(&load, request)
}

/// Greedy reference scheduler over a bare deadline multiset: process
/// requests in nondecreasing deadline order, placing each at the latest
/// feasible period. Returns per-request placements (aligned with the
/// input order) and the total lateness `sum(k* - k_hat)`, or `None` when
/// some request has no slot.
pub fn greedy_deadline_schedule(
    deadlines: &[Period],
    n: u32,
    horizon: Period,
) -> Option<(Vec<Period>, u64)> {
    greedy_with_direction(deadlines, n, horizon, Direction::LatestFeasible)
}

/// Test hook: the same greedy with a configurable direction, used to show
/// that the latest-feasible rule is what makes the schedule optimal.
pub fn greedy_with_direction(
    deadlines: &[Period],
    n: u32,
    horizon: Period,
    direction: Direction,
) -> Option<(Vec<Period>, u64)> {
    let mut order: Vec<usize> = (0..deadlines.len()).collect();
    order.sort_by_key(|&i| deadlines[i]);
    let mut load = PeriodLoad::new(horizon, n);
    let mut placed = vec![0; deadlines.len()];
    let mut lateness = 0u64;
    for &i in &order {
        let req = ChangeRequest {
            station: 0,
            to_type: 0,
            deadline: deadlines[i],
            direction,
        };
        let k = match direction {
            Direction::LatestFeasible => find_slot(&load, &req)?,
            // Earliest placement still must respect the deadline.
            Direction::EarliestFeasible => {
                (1..=deadlines[i]).find(|&k| load.has_slot(k))?
            }
        };
        load.occupy(k);
        placed[i] = k;
        lateness += (deadlines[i] - k) as u64;
    }
    Some((placed, lateness))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_requests_one_slot_per_period() {
        let (placed, lateness) = greedy_deadline_schedule(&[2, 2], 1, 4).unwrap();
        assert_eq!(lateness, 1);
        let mut sorted = placed.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![1, 2]);
    }

    #[test]
    fn overfull_first_period_is_infeasible() {
        assert!(greedy_deadline_schedule(&[1, 1], 1, 4).is_none());
        assert_eq!(check_necessary(&[1, 1], 1, 4), Err(1));
    }

    #[test]
    fn single_request_placed_at_deadline() {
        let (placed, lateness) = greedy_deadline_schedule(&[3], 1, 4).unwrap();
        assert_eq!(placed, vec![3]);
        assert_eq!(lateness, 0);
    }

    #[test]
    fn necessary_condition_prefix_bound() {
        assert_eq!(check_necessary(&[1, 2, 2], 1, 3), Err(2));
        assert!(check_necessary(&[1, 2, 3], 1, 3).is_ok());
        assert!(check_necessary(&[1, 1, 1, 1], 4, 2).is_ok());
    }

    #[test]
    fn earliest_direction_accumulates_lateness() {
        // Both directions stay feasible (they process by deadline), but
        // earliest placement deploys ahead of need.
        let deadlines = [2, 3];
        let (_, late) =
            greedy_with_direction(&deadlines, 1, 3, Direction::LatestFeasible).unwrap();
        assert_eq!(late, 0);
        let (_, late) =
            greedy_with_direction(&deadlines, 1, 3, Direction::EarliestFeasible).unwrap();
        assert_eq!(late, 2);
    }

    #[test]
    fn find_slot_respects_direction() {
        let mut load = PeriodLoad::new(5, 1);
        load.occupy(4);
        let req = ChangeRequest {
            station: 0,
            to_type: 0,
            deadline: 4,
            direction: Direction::LatestFeasible,
        };
        assert_eq!(find_slot(&load, &req), Some(3));
        let req = ChangeRequest {
            direction: Direction::EarliestFeasible,
            ..req
        };
        assert_eq!(find_slot(&load, &req), Some(1));
    }

    proptest! {
        /// The greedy succeeds exactly when the prefix bound holds.
        #[test]
        fn greedy_succeeds_iff_necessary(
            deadlines in proptest::collection::vec(1u32..=12, 0..30),
            n in 1u32..=4,
        ) {
            let ok = greedy_deadline_schedule(&deadlines, n, 12).is_some();
            prop_assert_eq!(ok, check_necessary(&deadlines, n, 12).is_ok());
        }

        /// Placements never miss their deadline and never overfill a period.
        #[test]
        fn placements_are_legal(
            deadlines in proptest::collection::vec(1u32..=8, 0..20),
            n in 1u32..=3,
        ) {
            if let Some((placed, _)) = greedy_deadline_schedule(&deadlines, n, 8) {
                let mut counts = [0u32; 9];
                for (i, &k) in placed.iter().enumerate() {
                    prop_assert!(k >= 1 && k <= deadlines[i]);
                    counts[k as usize] += 1;
                }
                prop_assert!(counts.iter().all(|&c| c <= n));
            }
        }
    }
}
