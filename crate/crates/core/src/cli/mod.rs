//! Ring-spec files, check planning and JSON reports.

pub mod plan;
pub mod run;
pub mod syntax;

pub use plan::{parse_ringspec, plan, Ambient, CheckPlan, CheckSpec, PlannedCheck};
pub use run::{run_checks, CheckRecord, Report, RunOptions, SCHEMA};
pub use syntax::{parse_document, Block, BlockKind, Document, Field};
