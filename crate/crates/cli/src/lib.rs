//! Seeded experiment driver: loads a scenario, runs the invariant checks of
//! every module and renders demonstration reports.

pub mod checks;
pub mod report;
pub mod scenario;

pub use report::{run_verify, Report};
pub use scenario::{ConfigError, Scenario, Setup};
