//! Golden test: the worked three-station example. Two LTE stations that
//! must be upgraded just in time for their clusters' demand growth, and
//! one legacy station with no remaining demand that gets decommissioned
//! as soon as the one-change-per-period budget allows.

mod common;

use common::{golden_expected, golden_scenario};
use evoplan_core::{plan, Mode, PlanStatus};

#[test]
fn golden_schedule_is_reproduced_exactly() {
    let sc = golden_scenario();
    let result = plan(&sc, Mode::Shared);
    assert_eq!(result.status, PlanStatus::Success);

    let mut got = result.schedule.changes().to_vec();
    got.sort_by_key(|c| (c.station, c.period));
    assert_eq!(got, golden_expected(&sc));
    assert_eq!(result.counts.enhancements, 3);
    assert_eq!(result.counts.decommissions, 1);
    assert_eq!(result.counts.creations, 0);
}

#[test]
fn golden_report_is_internally_consistent() {
    let sc = golden_scenario();
    let result = plan(&sc, Mode::Shared);
    let report = evoplan_core::build_report(&sc, &result.schedule, Mode::Shared);
    assert_eq!(report.periods.len(), 4);
    for m in &report.periods {
        assert!(m.capacity >= m.demand);
        assert!(m.unused >= 0.0);
        assert_eq!(m.hhi_compliance, 1.0);
    }
    // Final network: b1 at lte3 (3.0), b2 at lte2 (2.0), b3 off.
    assert_eq!(report.final_cost, 5.0);

    let dir = tempfile::tempdir().unwrap();
    evoplan_core::write_report(dir.path(), &sc, &result, &report).unwrap();
    let mismatches = evoplan_core::verify_report(dir.path(), &sc).unwrap();
    assert!(mismatches.is_empty(), "{mismatches:?}");
}
