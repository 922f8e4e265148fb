//! End-to-end experiments: configuration, seeded runs, reports.
//!
//! One run trains a network constructively, prunes it, discretizes its hidden
//! layer, extracts rules over the inputs and evaluates them. [`run_reann`]
//! repeats that for every configured seed and aggregates the results into an
//! [`ExperimentReport`], which renders as text or as a structured record.

mod config;
pub mod reference;
mod report;
mod run;

pub use config::{
    ClusteringSection, DatasetRef, ExperimentConfig, NetworkSection, RequiredAccuracy, RexSection,
    CONFIG_FORMAT,
};
pub use report::{
    median, render_report, Aggregates, ExperimentReport, ReportFormat, Stat, REPORT_FORMAT,
};
pub use run::{
    extract_phases, run_reann, run_seed, train_phases, Accuracy, DiscretizationSummary, Extraction,
    NodeSummary, RunOutcome, RunRecord, Stage, StageFailure, StageTimings, Trained,
};
