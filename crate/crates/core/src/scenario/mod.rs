//! Scenario files and every document produced from a run.

mod berth_plan;
mod config;
mod report;

pub use berth_plan::*;
pub use config::*;
pub use report::{emit_report, ReportFormat};
