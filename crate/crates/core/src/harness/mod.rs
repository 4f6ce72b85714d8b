//! Instance generation, experiment orchestration and reporting.

mod experiment;
mod generator;
mod report;
mod trend;

pub use experiment::{
    bench_plan, run_backend, run_experiment, Backend, ExperimentConfig, PlanEntry, RunRecord,
};
pub use generator::{generate, GeneratorError, GeneratorSpec};
pub use report::{
    plot_series, report, report_with, trend_fits, Format, Series, Timing, CSV_HEADER,
};
pub use trend::{fit_log_trend, TrendError, TrendFit};
