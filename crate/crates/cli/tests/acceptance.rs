//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

#[path = "../../core/tests/support/oracle.rs"]
mod oracle;

use std::fs;
use std::time::{Duration, Instant};

use limbgo_cli::cmd_study;
use limbgo_core::geom::{fit_rigid_transform, fit_sphere, wrap_angle, Rotation};
use limbgo_core::model::{JointName, MarkerId, MarkerFrame, TrialRecording};
use limbgo_core::report::{DofKind, DofLabel, StudyReport};
use limbgo_core::sim::{
    add_measurement_noise, run_study_detailed, simulate_input, MeasurementNoiseParams, Movement, RngStreams, StudyConfig,
    StudyRun, MEASUREMENT_SIGMA_MM,
};
use limbgo_core::solver::{
    compute_weights, go_solve_with, segmental_fit, FixedMask, SolveMode, SolverOptions, LAXITY_ANGLE, MAX_DISLOCATION,
};
use nalgebra::Vector3;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn full_noise(movement: Movement) -> StudyConfig {
    StudyConfig::for_movement(movement)
}

fn noise_free(movement: Movement) -> StudyConfig {
    let mut c = StudyConfig::for_movement(movement);
    c.n_trials = 1;
    c.measurement_noise.enabled = false;
    c.artefacts.enabled = false;
    c
}

/// Wall time of one trial, both modes, run on its own.
fn single_trial_time(mut config: StudyConfig) -> Duration {
    config.n_trials = 1;
    let start = Instant::now();
    run_study_detailed(&config).expect("single trial runs");
    start.elapsed()
}

fn noise_free_recovery() -> Outcome {
    let mut worst_angle = 0.0f64;
    let mut worst_disl = 0.0f64;
    let mut worst_time = Duration::ZERO;
    let mut frames = 0usize;
    for movement in Movement::ALL {
        let start = Instant::now();
        let run = run_study_detailed(&noise_free(movement)).map_err(|e| e.to_string())?;
        worst_time = worst_time.max(start.elapsed());
        worst_time = worst_time.max(single_trial_time(full_noise(movement)));
        let truth = run.truth.angles();
        for solution in &run.trials[0].solutions {
            if !solution.is_complete() || solution.frames.len() != truth.len() {
                return Err(format!("{movement} {}: incomplete solution", solution.mode));
            }
            for f in &solution.frames {
                frames += 1;
                for j in 0..3 {
                    for k in 0..3 {
                        worst_angle = worst_angle.max(wrap_angle(f.angles[j][k] - truth[f.index][j][k]).abs());
                    }
                    worst_disl = worst_disl.max(f.dislocations[j]);
                }
            }
        }
    }
    check(
        worst_angle < 1e-4 && worst_disl < 1e-4 && worst_time < Duration::from_secs(10),
        format!(
            "{frames} frames; max angle error {worst_angle:.2e} rad, max dislocation {worst_disl:.2e} mm, slowest trial {:.2} s",
            worst_time.as_secs_f64()
        ),
    )
}

fn constraint_satisfaction(runs: &[StudyRun]) -> Outcome {
    let elbow = JointName::Elbow.index();
    let wrist = JointName::Wrist.index();
    let (mut frames, mut violations) = (0usize, 0usize);
    let (mut max_abd, mut max_pro, mut max_disl) = (0.0f64, 0.0f64, 0.0f64);
    for run in runs {
        for t in &run.trials {
            let go = &t.solutions[0];
            if go.mode != SolveMode::Go {
                return Err("first solution is not GO".into());
            }
            if !go.is_complete() {
                return Err(format!("{} trial {}: {} failed frame(s)", run.config.movement, t.trial, go.failures.len()));
            }
            for f in &go.frames {
                frames += 1;
                let abd = f.angles[elbow][1].abs();
                let pro = f.angles[wrist][2].abs();
                let disl = f.dislocations[elbow].max(f.dislocations[wrist]);
                max_abd = max_abd.max(abd);
                max_pro = max_pro.max(pro);
                max_disl = max_disl.max(disl);
                violations += usize::from(abd > LAXITY_ANGLE || pro > LAXITY_ANGLE || disl > MAX_DISLOCATION);
            }
        }
    }
    check(
        violations == 0 && frames == 2 * 30 * 101,
        format!(
            "{frames} GO frames, {violations} violations; max |elbow abd-add| {:.6}°, max |wrist pro-sup| {:.6}°, max dislocation {max_disl:.6} mm",
            max_abd.to_degrees(),
            max_pro.to_degrees()
        ),
    )
}

fn label(joint: JointName, kind: DofKind) -> DofLabel {
    DofLabel { joint, kind }
}

fn error_reduction(report: &StudyReport) -> Outcome {
    let dofs = [
        label(JointName::Shoulder, DofKind::AxialRotation),
        label(JointName::Elbow, DofKind::AbductionAdduction),
        label(JointName::Elbow, DofKind::Dislocation),
        label(JointName::Wrist, DofKind::Dislocation),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for dof in dofs {
        let go = report.get(dof, SolveMode::Go).ok_or("missing GO row")?;
        let seg = report.get(dof, SolveMode::Segmental).ok_or("missing segmental row")?;
        let wins = go
            .per_trial
            .iter()
            .zip(&seg.per_trial)
            .filter(|(g, s)| g.trial == s.trial && g.rms < s.rms)
            .count();
        ok &= go.mean < seg.mean && wins >= 27 && go.per_trial.len() == 30;
        parts.push(format!("{dof}: mean {:.4} vs {:.4}, GO better in {wins}/{}", go.mean, seg.mean, go.per_trial.len()));
    }
    check(ok, parts.join("; "))
}

fn spurious_abduction(report: &StudyReport) -> Outcome {
    let seg = report
        .get(label(JointName::Elbow, DofKind::AbductionAdduction), SolveMode::Segmental)
        .ok_or("missing row")?;
    let deg = seg.mean.to_degrees();
    check(deg > 1.0 && seg.per_trial.len() == 30, format!("segmental elbow abd-add mean RMS {deg:.3}° over {} trials", seg.per_trial.len()))
}

fn variability_reduction(report: &StudyReport) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for dof in [label(JointName::Shoulder, DofKind::AxialRotation), label(JointName::Elbow, DofKind::AbductionAdduction)] {
        let go = report.get(dof, SolveMode::Go).and_then(|d| d.sd).ok_or("missing GO sd")?;
        let seg = report.get(dof, SolveMode::Segmental).and_then(|d| d.sd).ok_or("missing segmental sd")?;
        ok &= go < seg;
        parts.push(format!("{dof}: sd {go:.5} vs {seg:.5} rad"));
    }
    check(ok, parts.join("; "))
}

/// 3000 frames of twelve markers on a 100 mm grid.
fn grid_recording() -> TrialRecording {
    let frames = (0..3000)
        .map(|i| {
            let mut f = MarkerFrame::new(i as f64 / 50.0);
            for m in 0..12 {
                let p = Vector3::new((m % 4) as f64 * 100.0, (m / 4) as f64 * 100.0, 0.0);
                f.set(MarkerId::new(format!("M{m}")), p);
            }
            f
        })
        .collect();
    TrialRecording::new(50.0, frames).expect("valid recording")
}

fn noise_calibration() -> Outcome {
    let clean = grid_recording();
    let noisy = add_measurement_noise(&clean, &MeasurementNoiseParams::default(), RngStreams { master_seed: 1, trial: 1 });
    let ids = clean.marker_names();
    let mut e = Vec::new();
    let (mut pairs, mut pairs_ok) = (0usize, 0usize);
    for (a, b) in clean.frames.iter().zip(&noisy.frames) {
        for id in &ids {
            e.extend_from_slice((b.get(id).unwrap() - a.get(id).unwrap()).as_slice());
        }
        for i in 0..ids.len() {
            for j in i + 1..ids.len() {
                let d0 = (a.get(&ids[i]).unwrap() - a.get(&ids[j]).unwrap()).norm();
                let d1 = (b.get(&ids[i]).unwrap() - b.get(&ids[j]).unwrap()).norm();
                pairs += 1;
                pairs_ok += usize::from((d1 - d0).abs() <= 5.5);
            }
        }
    }
    let n = e.len() as f64;
    let mean = e.iter().sum::<f64>() / n;
    let sd = (e.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let within = e.iter().filter(|x| x.abs() <= 1.59).count() as f64 / n;
    let pair_fraction = pairs_ok as f64 / pairs as f64;
    check(
        e.len() >= 100_000
            && pairs >= 100_000
            && (sd / MEASUREMENT_SIGMA_MM - 1.0).abs() <= 0.02
            && (within - 0.99).abs() <= 0.005
            && pair_fraction >= 0.99,
        format!(
            "{} draws: sd {sd:.4} mm, |e| ≤ 1.59 in {within:.4}; {pairs} pairs: distance error ≤ 5.5 mm in {pair_fraction:.5}",
            e.len()
        ),
    )
}

fn artefact_schedule() -> Outcome {
    let mut checked = 0usize;
    let mut problems = Vec::new();
    for movement in Movement::ALL {
        let mut config = full_noise(movement);
        config.measurement_noise.enabled = false;
        let run = run_study_detailed(&noise_free(movement)).map_err(|e| e.to_string())?;
        for trial in 1..=config.n_trials as u64 {
            let (input, drawn) = simulate_input(&config, &run.subject, &run.truth, trial);
            for art in &drawn {
                let b = art.amplitude_mm;
                for step in 0..=20_000 {
                    let t = step as f64 * 1e-4;
                    let d = art.displacement(t);
                    checked += 1;
                    let whole = step % 10_000 == 0;
                    if (whole && d != Vector3::zeros()) || d.iter().any(|x| x.abs() > b) {
                        problems.push(format!("{movement} trial {trial} {} at t={t}", art.marker));
                    }
                }
            }
            for (clean, noisy) in run.truth.recording.frames.iter().zip(&input.frames) {
                for (id, p) in clean.iter() {
                    let d = noisy.get(id).unwrap() - p;
                    let b = drawn.iter().find(|a| &a.marker == id).map_or(0.0, |a| a.amplitude_mm);
                    checked += 1;
                    let whole = [0.0, 1.0, 2.0].contains(&clean.time);
                    if ((whole || b == 0.0) && d != Vector3::zeros()) || d.iter().any(|x| x.abs() > b) {
                        problems.push(format!("{movement} trial {trial} {id} frame at t={}", clean.time));
                    }
                }
            }
        }
    }
    check(
        problems.is_empty(),
        format!("{checked} displacement samples, {} out of schedule{}", problems.len(), problems.first().map_or(String::new(), |p| format!(" (first: {p})"))),
    )
}

fn oracle_suites() -> Outcome {
    let start = Instant::now();
    let mut failures = Vec::new();
    for seed in 0..100 {
        let inst = oracle::rigid_instance(seed);
        let (pose, rms) = fit_rigid_transform(&inst.reference, &inst.current).map_err(|e| e.to_string())?;
        let want = oracle::rigid_oracle(&inst);
        let angle = pose.rotation.angle_to(&Rotation::nearest(&want.rotation));
        let dt = (pose.translation - want.translation).norm();
        if angle >= 1e-6 || dt >= 1e-4 || (rms - want.rms).abs() >= 1e-3 {
            failures.push(format!("rigid {seed}"));
        }
    }
    for seed in 0..100 {
        let inst = oracle::sphere_instance(1000 + seed);
        let fit = fit_sphere(&inst.points).map_err(|e| e.to_string())?;
        let want = oracle::sphere_oracle(&inst);
        if (fit.center - want.center).norm() >= 1e-4
            || (fit.radius - want.radius).abs() >= 1e-4
            || (fit.rms_residual - want.rms).abs() >= 1e-6
        {
            failures.push(format!("sphere {seed}"));
        }
    }

    let mut config = full_noise(Movement::ShoulderRotation);
    config.n_trials = 1;
    config.master_seed = 20;
    let run = run_study_detailed(&config).map_err(|e| e.to_string())?;
    let model = &run.model;
    let elbow = 6 * (1 + JointName::Elbow.index());
    let mut fixed: FixedMask = [true; 24];
    fixed[elbow] = false;
    fixed[elbow + 1] = false;
    let mut worst = 0.0f64;
    for k in 0..20 {
        let i = 5 * k;
        let frame = &run.trials[0].input.frames[i];
        let truth = run.truth.coordinates[i];
        let weights = compute_weights(&segmental_fit(model, frame).map_err(|e| e.to_string())?.residuals);
        let (q, diag) = go_solve_with(model, frame, &weights, &truth, &SolverOptions::default(), &fixed)
            .map_err(|e| e.to_string())?;
        let want = oracle::go_slice_oracle(model, frame, &weights, &truth, (-LAXITY_ANGLE, LAXITY_ANGLE));
        let err = (q.joints[1].angles[0] - want[0]).abs().max((q.joints[1].angles[1] - want[1]).abs());
        worst = worst.max(err);
        if !diag.converged || err >= 1e-6 {
            failures.push(format!("GO frame {i}"));
        }
    }
    let elapsed = start.elapsed();
    check(
        failures.is_empty() && elapsed < Duration::from_secs(300),
        format!(
            "100 rigid, 100 sphere, 20 GO frames (max GO deviation {worst:.1e} rad); {} failures; {:.1} s",
            failures.len(),
            elapsed.as_secs_f64()
        ),
    )
}

fn determinism() -> Outcome {
    let mut config = full_noise(Movement::ShoulderRotation);
    config.output.emit_plot_data = true;
    let dirs = [tempfile::tempdir().map_err(|e| e.to_string())?, tempfile::tempdir().map_err(|e| e.to_string())?];
    let mut outputs = Vec::new();
    for d in &dirs {
        let (_, written) = cmd_study(&config, d.path()).map_err(|e| e.to_string())?;
        outputs.push(written);
    }
    let mut differing = Vec::new();
    for (a, b) in outputs[0].iter().zip(&outputs[1]) {
        let same = fs::read(a).map_err(|e| e.to_string())? == fs::read(b).map_err(|e| e.to_string())?;
        if !same || a.file_name() != b.file_name() {
            differing.push(a.display().to_string());
        }
    }
    check(
        differing.is_empty() && outputs[0].len() == 4 && outputs[1].len() == 4,
        format!("{} report files compared, {} differ", outputs[0].len(), differing.len()),
    )
}

fn main() {
    let mut results: Vec<(usize, &str, Outcome)> = Vec::new();
    results.push((1, "noise-free recovery", noise_free_recovery()));

    let runs: Vec<StudyRun> = Movement::ALL
        .into_iter()
        .map(|m| run_study_detailed(&full_noise(m)).expect("full-noise study runs"))
        .collect();
    let shoulder = &runs[0].report;
    results.push((2, "constraint satisfaction", constraint_satisfaction(&runs)));
    results.push((3, "error reduction", error_reduction(shoulder)));
    results.push((4, "spurious elbow abduction", spurious_abduction(shoulder)));
    results.push((5, "variability reduction", variability_reduction(shoulder)));
    results.push((6, "noise-model calibration", noise_calibration()));
    results.push((7, "artefact schedule", artefact_schedule()));
    results.push((8, "oracle suites", oracle_suites()));
    results.push((9, "determinism", determinism()));

    let mut failed = 0;
    for (n, name, outcome) in &results {
        match outcome {
            Ok(detail) => println!("PASS criterion {n} ({name}): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {n} ({name}): {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
