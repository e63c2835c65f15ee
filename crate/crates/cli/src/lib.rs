//! Experiment runner for the `zfharq` simulator: configuration parsing,
//! the throughput-profile and rate-delay experiments, self-test, and
//! reproducible run manifests.

pub mod config;
pub mod error;
pub mod jobs;
pub mod manifest;
pub mod selftest;

pub use config::{parse_config, parse_config_str};
pub use error::{CliError, CliResult};
pub use jobs::{execute, Job, ProfileMode};
pub use manifest::{replay, run_and_record, RunManifest};
