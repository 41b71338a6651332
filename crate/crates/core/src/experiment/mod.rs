//! Configuration-driven noise sweeps.
//!
//! A sweep runs one Landweber iteration per `(δ, seed)` cell, applies every
//! requested rule to its trace and collects one [`ReportRow`] per rule. Rows
//! compare each rule against the optimal index, so `error_ratio ≥ 1` always.

mod config;
mod report;
mod run;

pub use config::{ExperimentConfig, NoiseStreams, OmegaMode, DEFAULT_OUTPUT, DEFAULT_SEEDS};
pub use report::{
    emit_csv, emit_series, median, series_csv, summarize, summary_table, to_csv, RuleSummary, CSV_HEADER,
    SERIES_HEADER,
};
pub use run::{
    rows_for_cell, run_cell, run_experiment, run_experiment_with, CellFailure, CellRun, ExperimentReport,
    ReportRow,
};
