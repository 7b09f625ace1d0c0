//! Exact dock assignment and truck scheduling with resource deployment
//! scenarios.

pub mod bp;
pub mod cli;
pub mod compact;
pub mod core;
pub mod instgen;
pub mod oracle;

pub use crate::core::{
    check_feasibility, evaluate, load_instance, load_schedule, prune_dominated_scenarios,
    read_instance, read_schedule, save_instance, save_schedule, write_instance, write_schedule,
    Assignment, Capacity, CoreError, CostBreakdown, DominanceKind, DominanceReport, Instance,
    Profile, Removal, Resource, ResourceScenario, Schedule, ScheduleFile, Truck, Variant,
    Violation,
};
