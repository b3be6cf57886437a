//! Seeded batch experiments over the estimators, with CSV / JSON-lines output.

pub mod config;
pub mod instances;
pub mod output;
pub mod runner;

pub use config::{Algorithm, ExperimentConfig, OutputFormat};
pub use instances::{Builtin, Instance, InstanceSource, InstanceSpec};
pub use output::{emit, parse_csv, parse_jsonl, write_records, TrialRecord, COLUMNS};
pub use runner::{log_log_slope, matched_samples, run, run_trial, trial_seed, Summary, SweepPoint};
