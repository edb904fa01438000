//! Evolution planning for multi-operator cellular networks.
//!
//! The crate models a network as base stations with switchable types,
//! subscriber clusters with per-operator demand over a discrete horizon,
//! and a per-period budget on type changes. The planner produces a
//! change schedule meeting demand everywhere, keeping local market
//! concentration below a regulatory ceiling, and then cutting cost —
//! either for a pooled (shared) network or per operator independently.
//!
//! Layout:
//! - [`scenario`]: instance model, validation, synthetic generation, I/O;
//! - [`assessment`]: served-capacity allocation and HHI metrics;
//! - [`planner`]: deadline scheduling and the three-phase greedy;
//! - [`oracle`]: brute-force references for certification on small cases;
//! - [`report`]: per-period metrics and report files.

pub mod assessment;
pub mod error;
pub mod oracle;
pub mod planner;
pub mod report;
pub mod scenario;

pub use assessment::{
    assess, assess_view, goal1_violations, goal1_violations_independent, goal2_satisfied, hhi,
    hhi_report, market_sigma, AssessmentResult, Assessor, DemandView, HhiReport, HhiValue, Mode,
    NetworkView, ProportionalAssessor,
};
pub use error::{GeneratorError, IoError, OracleError, ScenarioError};
pub use oracle::{
    oracle_feasible_sets, oracle_min_cost_plan, oracle_schedulable, oracle_schedule, OracleBudget,
};
pub use planner::{
    check_necessary, count_decisions, greedy_deadline_schedule, greedy_with_direction, plan,
    plan_with,
    validate_schedule, ChangeRequest, DecisionCounts, Direction, PeriodLoad, Phase, PhaseEvent,
    PlanResult, PlanStatus,
};
pub use report::{build_report, verify_report, write_report, PlanReport};
pub use scenario::{
    default_type_table, generate, load, save, validate, BaseStation, Change, ClusterIdx,
    CostOverride, GeneratorParams, OperatorIdx, Period, Scenario, Schedule, StationIdx,
    StationType, SubscriberCluster, TechClass, TypeIdx, Violation,
};
