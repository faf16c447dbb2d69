//! Plain-text marker trajectories and solution time series.
//!
//! Trial CSV layout:
//!
//! ```text
//! # sample_rate_hz: 50
//! time,C7_x,C7_y,C7_z,L3_x,...
//! 0,-80,1450,0,-80,...
//! ```
//!
//! Seconds and millimetres. The comment line is optional; without it the
//! rate is inferred from the time column. An empty cell marks an absent marker.

use std::collections::BTreeSet;
use std::fs::File;
use std::io::Read;
use std::path::Path;

use nalgebra::Vector3;

use crate::error::{Error, Result};
use crate::model::{KinematicModel, MarkerFrame, MarkerId, TrialRecording};
use crate::report::{DofKind, DofLabel};
use crate::solver::TrialSolution;

const RATE_KEY: &str = "sample_rate_hz";

pub fn read_trial_csv(path: &Path) -> Result<TrialRecording> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_trial_csv(file, path)
}

/// Parses a trial; `path` only labels errors.
pub fn parse_trial_csv(mut input: impl Read, path: &Path) -> Result<TrialRecording> {
    let mut text = String::new();
    input.read_to_string(&mut text).map_err(|e| Error::io(path, e))?;
    let err = |line: u64, message: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut declared_rate = None;
    let mut skipped = 0u64;
    let mut body = text.as_str();
    for (i, line) in text.lines().enumerate() {
        let Some(comment) = line.trim_start().strip_prefix('#') else { break };
        skipped += 1;
        body = body.split_once('\n').map_or("", |(_, rest)| rest);
        if let Some((key, value)) = comment.split_once(':') {
            if key.trim() == RATE_KEY {
                let rate: f64 = value
                    .trim()
                    .parse()
                    .map_err(|e| err(i as u64 + 1, format!("sample rate: {e}")))?;
                declared_rate = Some(rate);
            }
        }
    }

    // Line numbers from the reader count from the first non-comment line.
    let err = |line: u64, message: String| err(line + skipped, message);
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(body.as_bytes());
    let mut records = reader.records();
    let header = match records.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => return Err(err(e.position().map_or(1, |p| p.line()), e.to_string())),
        None => return Err(err(1, "missing header row".into())),
    };
    let header_line = header.position().map_or(1, |p| p.line());
    let markers = parse_header(&header).map_err(|m| err(header_line, m))?;

    let mut frames = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() == 1 && rec[0].trim().is_empty() {
            continue;
        }
        if rec.len() != 1 + 3 * markers.len() {
            return Err(err(
                line,
                format!("expected {} fields, found {}", 1 + 3 * markers.len(), rec.len()),
            ));
        }
        let time: f64 = rec[0]
            .trim()
            .parse()
            .map_err(|e| err(line, format!("time '{}': {e}", &rec[0])))?;
        let mut frame = MarkerFrame::new(time);
        for (m, id) in markers.iter().enumerate() {
            let cells = [&rec[1 + 3 * m], &rec[2 + 3 * m], &rec[3 + 3 * m]];
            if cells.iter().all(|c| c.trim().is_empty()) {
                continue;
            }
            let mut p = Vector3::zeros();
            for (k, c) in cells.iter().enumerate() {
                p[k] = c
                    .trim()
                    .parse()
                    .map_err(|e| err(line, format!("{id} coordinate '{c}': {e}")))?;
            }
            frame.set(id.clone(), p);
        }
        frames.push(frame);
    }
    if frames.is_empty() {
        return Err(err(header_line + 1, "no data rows".into()));
    }

    let rate = match declared_rate {
        Some(r) => r,
        None if frames.len() >= 2 => 1.0 / (frames[1].time - frames[0].time),
        None => {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: format!("single-frame trial needs a '# {RATE_KEY}: <Hz>' line"),
            })
        }
    };
    TrialRecording::new(rate, frames).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn parse_header(header: &csv::StringRecord) -> std::result::Result<Vec<MarkerId>, String> {
    if header.get(0).map(str::trim) != Some("time") {
        return Err("first column must be 'time'".into());
    }
    if !(header.len() - 1).is_multiple_of(3) {
        return Err(format!("{} coordinate columns is not a multiple of 3", header.len() - 1));
    }
    let mut markers = Vec::new();
    let mut seen = BTreeSet::new();
    for triple in (1..header.len()).step_by(3) {
        let names: Vec<&str> = (0..3).map(|k| header[triple + k].trim()).collect();
        let base = names[0]
            .strip_suffix("_x")
            .ok_or_else(|| format!("column '{}' should end in _x", names[0]))?;
        for (name, axis) in names.iter().zip(["_x", "_y", "_z"]) {
            if name.strip_suffix(axis) != Some(base) {
                return Err(format!("expected column '{base}{axis}', found '{name}'"));
            }
        }
        if base.is_empty() || !seen.insert(base.to_string()) {
            return Err(format!("empty or duplicate marker name '{base}'"));
        }
        markers.push(MarkerId::new(base));
    }
    Ok(markers)
}

/// Trial as CSV text, markers in name order, rate in the comment line.
pub fn render_trial_csv(recording: &TrialRecording) -> String {
    let markers = recording.marker_names();
    let mut out = format!("# {RATE_KEY}: {}\ntime", recording.sample_rate);
    for m in &markers {
        out.push_str(&format!(",{m}_x,{m}_y,{m}_z"));
    }
    out.push('\n');
    for frame in &recording.frames {
        out.push_str(&frame.time.to_string());
        for m in &markers {
            match frame.get(m) {
                Some(p) => out.push_str(&format!(",{},{},{}", p.x, p.y, p.z)),
                None => out.push_str(",,,"),
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_trial_csv(path: &Path, recording: &TrialRecording) -> Result<()> {
    std::fs::write(path, render_trial_csv(recording)).map_err(|e| Error::io(path, e))
}

/// Checks a recording against a model's marker names: unknown names and
/// tracked markers never observed are both errors.
pub fn match_markers(model: &KinematicModel, recording: &TrialRecording) -> Result<()> {
    let known: BTreeSet<MarkerId> = model.marker_set.all().into_iter().collect();
    let present: BTreeSet<MarkerId> = recording.marker_names().into_iter().collect();
    let unknown: Vec<String> = present.difference(&known).map(|m| m.to_string()).collect();
    if !unknown.is_empty() {
        return Err(Error::UnknownMarkers(unknown));
    }
    let missing: Vec<String> = model
        .tracked_markers()
        .into_iter()
        .filter(|(_, m)| !present.contains(*m))
        .map(|(_, m)| m.to_string())
        .collect();
    if !missing.is_empty() {
        return Err(Error::MissingMarkers(missing));
    }
    Ok(())
}

/// Solution time series: angles in degrees, dislocations in mm, GO diagnostics.
pub fn render_solution_csv(model: &KinematicModel, solution: &TrialSolution) -> String {
    let dofs = DofLabel::all();
    let mut out = String::from("frame,time");
    for d in &dofs {
        let unit = if d.is_angle() { "deg" } else { "mm" };
        out.push_str(&format!(",{d}_{unit}"));
    }
    out.push_str(",converged,iterations,cost\n");
    for f in &solution.frames {
        out.push_str(&format!("{},{}", f.index, f.time));
        for d in &dofs {
            let j = d.joint.index();
            let value = match d.kind {
                DofKind::Dislocation => f.dislocations[j],
                _ => {
                    let k = d
                        .angle_index(&model.joint(d.joint).euler_sequence)
                        .expect("joint sequence covers X, Y and Z");
                    f.angles[j][k].to_degrees()
                }
            };
            out.push_str(&format!(",{value}"));
        }
        match &f.solve {
            Some(s) => out.push_str(&format!(",{},{},{}\n", s.converged, s.iterations, s.final_cost)),
            None => out.push_str(",,,\n"),
        }
    }
    out
}
