//! Report files.
//!
//! * `summary.csv`: `dof,mode,unit,n_trials,mean,sd`, angles in degrees, lengths in mm.
//! * `per_trial.csv`: `trial,dof,mode,unit,rms`, angles in radians, lengths in mm.
//! * `summary.json`: the whole report, radians and mm.
//! * `plot_data.json` (optional): per DOF, mean and SD of both modes in display units.
//!
//! Floats are written in shortest round-trip form, so reading `per_trial.csv`
//! back reproduces every value exactly.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::metrics::DofLabel;
use super::study_report::{ReportMetadata, RmsRecord, StudyReport};
use crate::error::{Error, Result};
use crate::solver::SolveMode;

pub const SUMMARY_CSV: &str = "summary.csv";
pub const PER_TRIAL_CSV: &str = "per_trial.csv";
pub const SUMMARY_JSON: &str = "summary.json";
pub const PLOT_DATA_JSON: &str = "plot_data.json";

const SUMMARY_HEADER: &str = "dof,mode,unit,n_trials,mean,sd";
const PER_TRIAL_HEADER: &str = "trial,dof,mode,unit,rms";

fn display_scale(dof: &DofLabel) -> (f64, &'static str) {
    if dof.is_angle() {
        (180.0 / std::f64::consts::PI, "deg")
    } else {
        (1.0, "mm")
    }
}

pub fn render_summary_csv(report: &StudyReport) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for d in &report.dofs {
        let (scale, unit) = display_scale(&d.dof);
        let sd = d.sd.map(|s| (s * scale).to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            d.dof,
            d.mode,
            unit,
            d.per_trial.len(),
            d.mean * scale,
            sd
        ));
    }
    out
}

pub fn render_per_trial_csv(report: &StudyReport) -> String {
    let mut out = String::from(PER_TRIAL_HEADER);
    out.push('\n');
    for r in report.records() {
        let unit = if r.dof.is_angle() { "rad" } else { "mm" };
        out.push_str(&format!("{},{},{},{},{}\n", r.trial, r.dof, r.mode, unit, r.rms));
    }
    out
}

#[derive(Serialize)]
struct PlotBar {
    mean: f64,
    sd: Option<f64>,
}

#[derive(Serialize)]
struct PlotEntry {
    dof: DofLabel,
    unit: &'static str,
    go: Option<PlotBar>,
    segmental: Option<PlotBar>,
}

pub fn render_plot_data(report: &StudyReport) -> Result<String> {
    let entries: Vec<PlotEntry> = DofLabel::all()
        .into_iter()
        .filter(|dof| SolveMode::ALL.iter().any(|m| report.get(*dof, *m).is_some()))
        .map(|dof| {
            let (scale, unit) = display_scale(&dof);
            let bar = |mode| {
                report.get(dof, mode).map(|d| PlotBar {
                    mean: d.mean * scale,
                    sd: d.sd.map(|s| s * scale),
                })
            };
            PlotEntry {
                dof,
                unit,
                go: bar(SolveMode::Go),
                segmental: bar(SolveMode::Segmental),
            }
        })
        .collect();
    json(&entries)
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidConfig(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf> {
    fs::write(&path, contents).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Writes the report files into `dir` (created if needed); returns their paths.
pub fn export_report(report: &StudyReport, dir: &Path, plot_data: bool) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = vec![
        write(dir.join(SUMMARY_CSV), &render_summary_csv(report))?,
        write(dir.join(PER_TRIAL_CSV), &render_per_trial_csv(report))?,
        write(dir.join(SUMMARY_JSON), &json(report)?)?,
    ];
    if plot_data {
        written.push(write(dir.join(PLOT_DATA_JSON), &render_plot_data(report)?)?);
    }
    Ok(written)
}

/// Parses a long-form per-trial table.
pub fn read_per_trial_csv(path: &Path) -> Result<Vec<RmsRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_per_trial_csv(&text, path)
}

pub fn parse_per_trial_csv(text: &str, path: &Path) -> Result<Vec<RmsRecord>> {
    let parse_err = |line: usize, message: String| Error::Parse {
        path: path.to_path_buf(),
        line: line as u64,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == PER_TRIAL_HEADER => {}
        _ => return Err(parse_err(1, format!("expected header '{PER_TRIAL_HEADER}'"))),
    }
    lines
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let n = i + 1;
            let f: Vec<&str> = l.split(',').collect();
            if f.len() != 5 {
                return Err(parse_err(n, format!("expected 5 fields, found {}", f.len())));
            }
            let trial = f[0].parse().map_err(|e| parse_err(n, format!("trial: {e}")))?;
            let dof: DofLabel = f[1].parse().map_err(|e: Error| parse_err(n, e.to_string()))?;
            let mode: SolveMode = f[2].parse().map_err(|e: Error| parse_err(n, e.to_string()))?;
            let expected_unit = if dof.is_angle() { "rad" } else { "mm" };
            if f[3] != expected_unit {
                return Err(parse_err(n, format!("unit '{}' should be '{expected_unit}'", f[3])));
            }
            let rms = f[4].parse().map_err(|e| parse_err(n, format!("rms: {e}")))?;
            Ok(RmsRecord { trial, dof, mode, rms })
        })
        .collect()
}

/// Rebuilds a report from long-form records and the metadata it came with.
pub fn reaggregate(metadata: ReportMetadata, records: &[RmsRecord]) -> Result<StudyReport> {
    StudyReport::assemble(metadata, records)
}
