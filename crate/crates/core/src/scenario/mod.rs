//! Problem-instance data model, validation, generation and file I/O.

pub mod generate;
pub mod io;
pub mod types;
pub mod validate;

pub use generate::{default_type_table, generate, GeneratorParams};
pub use io::{load, save};
pub use types::{
    BaseStation, Change, ClusterIdx, CostOverride, OperatorIdx, Period, Scenario, Schedule,
    StationIdx, StationType, SubscriberCluster, TechClass, TypeIdx,
};
pub use validate::{validate, Violation};
