//! Configuration-driven jobs over the cqms library: parse a job file, run
//! it, and emit a CSV report, a plot-ready TSV file and a summary.

pub mod config;
pub mod jobs;
pub mod report;

pub use config::{parse_config, serialize_config, ConfigError, JobConfig, JobKind};
pub use jobs::{run_job, JobError, JobOutcome};
