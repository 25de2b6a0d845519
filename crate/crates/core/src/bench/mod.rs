//! Orchestration: run configuration, the dataset and training pipeline,
//! scenario runs, and reports.

mod config;
mod pipeline;
mod report;
mod run;

pub use config::{Profile, RunConfig, StrategyKind, SweepSteps};
pub use pipeline::{
    inverse_datasets, label_scale, sweep_datasets, train_model, write_eval_report, write_loss_history, Partitioned,
    IMS_LABEL_SCALE, RECBM_LABEL_SCALE, TEST_FRACTION,
};
pub use report::{consolidate, Report, ScenarioRow, StrategySummary, REPORT_SCHEMA_VERSION, STABLE_SD};
pub use run::{execute_run, run_scenarios, write_run, Manifest, RunOutput, Timing};
