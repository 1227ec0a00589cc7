//! Verification suites over the kelab-core catalog, their JSON reports and the
//! batch runner behind the `kelab` binary.

pub mod report;
pub mod runner;
pub mod suites;

pub use report::{Sample, SideFile, VerificationReport};
pub use runner::{run_all, RunAllConfig, RunAllOutcome};
pub use suites::{run_suite, suite_info, RunError, SuiteConfig, SuiteInfo, SUITES};
