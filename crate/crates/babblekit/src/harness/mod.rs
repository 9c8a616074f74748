//! Experiment orchestration, statistics and reporting.

pub mod records;
pub mod report;
pub mod runner;
pub mod stats;

pub use records::{read_records, FileHeader, JsonlWriter, PassSummary, RunLogLine, TrialRecord};
pub use report::{coart_report, identification_table, CoartReport, Condition, IdTable};
pub use runner::{plan_jobs, run_experiment, trial_seed, RunOutput, TrialJob};
pub use stats::{welch_t_test, WelchResult};
