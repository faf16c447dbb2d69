//! Error metrics, cross-trial aggregation and report files.

mod export;
mod metrics;
mod study_report;

pub use export::{
    export_report, parse_per_trial_csv, read_per_trial_csv, reaggregate, render_per_trial_csv,
    render_plot_data, render_summary_csv, PER_TRIAL_CSV, PLOT_DATA_JSON, SUMMARY_CSV, SUMMARY_JSON,
};
pub use metrics::{aggregate, error_series, rms, Aggregate, DofErrorSeries, DofKind, DofLabel};
pub use study_report::{
    ConstraintSummary, DofSummary, FailedTrial, ReportMetadata, RmsRecord, SolverSummary, StudyReport,
    TrialRms, REPORT_FORMAT, REPORT_VERSION, SD_CONVENTION,
};
