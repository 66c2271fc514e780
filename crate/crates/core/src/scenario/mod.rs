//! Scenario plumbing: config ingestion, check orchestration, reports, the
//! shipped scenario library, and the randomized verification suite.

pub mod config;
pub mod library;
pub mod randgen;
pub mod report;
pub mod runner;
pub mod verify;

pub use config::{load_config, save_config, ScenarioConfig};
pub use report::{Check, CheckStatus, RunReport};
pub use runner::{run_scenario, run_stage, Stage};
pub use verify::{verify, VerifyOptions};
