//! CSV and JSON reports plus plot-ready series.
//!
//! Wall times differ from run to run. With [`Timing::Redacted`] they are
//! left out of every output so that reports of a seeded sweep are
//! byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use super::experiment::{Backend, RunRecord};
use super::trend::{fit_log_trend, TrendFit};

pub const CSV_HEADER: &str =
    "instance_size,backend,best_energy,makespan,violations,wall_time_ns,reads,seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Timing {
    #[default]
    Measured,
    Redacted,
}

/// `(x, y)` points of one backend and metric.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Series {
    pub backend: Backend,
    pub metric: &'static str,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    /// Whitespace-separated `x y` lines under a `# x y` header.
    pub fn to_dat(&self) -> String {
        let mut out = format!(
            "# {} {}: instance_size {}\n",
            self.backend, self.metric, self.metric
        );
        for (x, y) in &self.points {
            let _ = writeln!(out, "{x} {y}");
        }
        out
    }

    pub fn file_suffix(&self) -> String {
        format!("{}.{}.dat", self.backend, self.metric)
    }
}

fn successful(records: &[RunRecord]) -> impl Iterator<Item = &RunRecord> {
    records.iter().filter(|r| r.error.is_none())
}

/// Log fit of wall time against size, per backend with at least three
/// distinct sizes among its successful runs.
pub fn trend_fits(records: &[RunRecord]) -> BTreeMap<Backend, TrendFit> {
    let mut points: BTreeMap<Backend, Vec<(f64, f64)>> = BTreeMap::new();
    for r in successful(records) {
        points
            .entry(r.backend)
            .or_default()
            .push((r.instance_size as f64, r.wall_time_ns as f64));
    }
    points
        .into_iter()
        .filter(|(_, pts)| {
            let mut sizes: Vec<u64> = pts.iter().map(|p| p.0 as u64).collect();
            sizes.sort_unstable();
            sizes.dedup();
            sizes.len() >= 3
        })
        .filter_map(|(b, pts)| fit_log_trend(&pts).ok().map(|fit| (b, fit)))
        .collect()
}

pub fn plot_series(records: &[RunRecord], timing: Timing) -> Vec<Series> {
    let mut by_backend: BTreeMap<Backend, Vec<&RunRecord>> = BTreeMap::new();
    for r in successful(records) {
        by_backend.entry(r.backend).or_default().push(r);
    }
    let mut series = Vec::new();
    for (backend, runs) in by_backend {
        let metric = |metric: &'static str, y: &dyn Fn(&RunRecord) -> Option<f64>| Series {
            backend,
            metric,
            points: runs
                .iter()
                .filter_map(|r| y(r).map(|y| (r.instance_size as f64, y)))
                .collect(),
        };
        series.push(metric("best_energy", &|r| r.best_energy.map(|e| e as f64)));
        series.push(metric("makespan", &|r| r.makespan.map(|m| m as f64)));
        if timing == Timing::Measured {
            series.push(metric("wall_time_ns", &|r| Some(r.wall_time_ns as f64)));
        }
    }
    series
}

fn cell<T: ToString>(value: Option<T>) -> String {
    value.map(|v| v.to_string()).unwrap_or_default()
}

fn to_csv(records: &[RunRecord], timing: Timing) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let wall = match timing {
            Timing::Measured => r.wall_time_ns.to_string(),
            Timing::Redacted => String::new(),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.instance_size,
            r.backend,
            cell(r.best_energy),
            cell(r.makespan),
            cell(r.violations),
            wall,
            r.reads,
            r.seed
        );
    }
    for r in records.iter().filter(|r| r.error.is_some()) {
        let message = r.error.as_deref().unwrap_or_default().replace('\n', " ");
        let _ = writeln!(
            out,
            "# error size={} backend={}: {message}",
            r.instance_size, r.backend
        );
    }
    if timing == Timing::Measured {
        for (backend, fit) in trend_fits(records) {
            let _ = writeln!(
                out,
                "# trend backend={backend} model=a*ln(x)+b a={} b={} r_squared={} zero_variance={}",
                fit.a, fit.b, fit.r_squared, fit.zero_variance
            );
        }
    }
    out
}

#[derive(Serialize)]
struct JsonRecord<'a> {
    instance_size: usize,
    backend: Backend,
    best_energy: Option<i64>,
    makespan: Option<i64>,
    violations: Option<usize>,
    wall_time_ns: Option<u64>,
    reads: usize,
    seed: u64,
    error: Option<&'a str>,
}

#[derive(Serialize)]
struct JsonReport<'a> {
    records: Vec<JsonRecord<'a>>,
    trends: BTreeMap<Backend, TrendFit>,
    series: Vec<Series>,
}

fn to_json(records: &[RunRecord], timing: Timing) -> String {
    let report = JsonReport {
        records: records
            .iter()
            .map(|r| JsonRecord {
                instance_size: r.instance_size,
                backend: r.backend,
                best_energy: r.best_energy,
                makespan: r.makespan,
                violations: r.violations,
                wall_time_ns: (timing == Timing::Measured).then_some(r.wall_time_ns),
                reads: r.reads,
                seed: r.seed,
                error: r.error.as_deref(),
            })
            .collect(),
        trends: match timing {
            Timing::Measured => trend_fits(records),
            Timing::Redacted => BTreeMap::new(),
        },
        series: plot_series(records, timing),
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    text
}

pub fn report(records: &[RunRecord], format: Format) -> String {
    report_with(records, format, Timing::Measured)
}

pub fn report_with(records: &[RunRecord], format: Format, timing: Timing) -> String {
    match format {
        Format::Csv => to_csv(records, timing),
        Format::Json => to_json(records, timing),
    }
}
