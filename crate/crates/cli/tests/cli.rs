use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use limbgo_cli::{cmd_calibrate, read_model, EXIT_DATA, EXIT_USAGE, MODEL_FILE};
use limbgo_core::io::{read_trial_csv, render_solution_csv, write_trial_csv};
use limbgo_core::sim::{calibrate_subject, make_synthetic_subject, simulate_input, Anthropometry, StudyConfig};
use limbgo_core::solver::{solve_trial, SolveMode};
use limbgo_core::{calibrate, MarkerFrame, TrialRecording};

fn limbgo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_limbgo")).args(args).output().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn calibrate_cli(static_csv: &Path, out: &Path) -> Output {
    let shoulder = fixture("shoulder_circumduction.csv");
    let wrist = fixture("wrist_circumduction.csv");
    limbgo(&["calibrate", "--static", s(static_csv), "--shoulder", s(&shoulder), "--wrist", s(&wrist), "--out", s(out)])
}

#[test]
fn fixture_calibration_matches_in_process() {
    let dir = tempfile::tempdir().unwrap();
    let out = calibrate_cli(&fixture("subject_static.csv"), dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(String::from_utf8_lossy(&out.stdout).contains("shoulder sphere rms"));
    let written = read_model(&dir.path().join(MODEL_FILE)).unwrap();

    let static_frame = read_trial_csv(&fixture("subject_static.csv")).unwrap().frames.remove(0);
    let expected = calibrate(
        &static_frame,
        &read_trial_csv(&fixture("shoulder_circumduction.csv")).unwrap(),
        &read_trial_csv(&fixture("wrist_circumduction.csv")).unwrap(),
    )
    .unwrap();
    assert_eq!(written, expected);
    let subject = make_synthetic_subject(&Anthropometry::default()).unwrap();
    assert_eq!(written, calibrate_subject(&subject).unwrap());
}

#[test]
fn calibration_input_errors_are_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixture("subject_static.csv")).unwrap();

    let truncated = dir.path().join("truncated.csv");
    let row = text.lines().nth(2).unwrap();
    fs::write(&truncated, format!("{}\n{}\n{}\n", text.lines().next().unwrap(), text.lines().nth(1).unwrap(), &row[..row.len() / 2])).unwrap();
    let out = calibrate_cli(&truncated, dir.path());
    assert_eq!(out.status.code(), Some(EXIT_DATA));
    assert!(stderr(&out).contains("truncated.csv:3:"), "{}", stderr(&out));

    let rec = read_trial_csv(&fixture("subject_static.csv")).unwrap();
    let mut frame: MarkerFrame = rec.frames[0].clone();
    frame.remove(&"C7".into());
    let no_c7 = dir.path().join("no_c7.csv");
    write_trial_csv(&no_c7, &TrialRecording::new(1.0, vec![frame]).unwrap()).unwrap();
    let out = calibrate_cli(&no_c7, dir.path());
    assert_eq!(out.status.code(), Some(EXIT_DATA));
    assert!(stderr(&out).contains("missing marker(s): C7"), "{}", stderr(&out));
    assert!(!dir.path().join(MODEL_FILE).exists());
}

#[test]
fn in_process_calibrate_averages_static_frames() {
    let dir = tempfile::tempdir().unwrap();
    let rec = read_trial_csv(&fixture("subject_static.csv")).unwrap();
    let mut frames = vec![rec.frames[0].clone(), rec.frames[0].clone()];
    frames[1].time = 1.0;
    let path = dir.path().join("static2.csv");
    write_trial_csv(&path, &TrialRecording::new(1.0, frames).unwrap()).unwrap();
    let (a, _) = cmd_calibrate(&path, &fixture("shoulder_circumduction.csv"), &fixture("wrist_circumduction.csv")).unwrap();
    let (b, _) = cmd_calibrate(&fixture("subject_static.csv"), &fixture("shoulder_circumduction.csv"), &fixture("wrist_circumduction.csv")).unwrap();
    assert_eq!(a, b);
}

fn study(dir: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["study", "--out", s(dir)];
    args.extend_from_slice(extra);
    limbgo(&args)
}

#[test]
fn same_seed_gives_byte_identical_reports() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = study(d.path(), &["--trials", "3", "--seed", "11", "--movement", "pro-supination", "--emit-plot-data"]);
        assert!(out.status.success(), "{}", stderr(&out));
    }
    for name in ["summary.csv", "per_trial.csv", "summary.json", "plot_data.json"] {
        assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
    }
    let c = tempfile::tempdir().unwrap();
    assert!(study(c.path(), &["--trials", "3", "--seed", "12", "--movement", "pro-supination"]).status.success());
    assert_ne!(fs::read(a.path().join("per_trial.csv")).unwrap(), fs::read(c.path().join("per_trial.csv")).unwrap());
}

#[test]
fn noise_free_smoke_study_is_near_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = study(dir.path(), &["--trials", "1", "--no-noise"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().skip(1).collect();
    assert_eq!(rows.len(), 24);
    for row in rows {
        let mean: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
        assert!(mean < 1e-4, "{row}");
    }
    assert!(!dir.path().join("plot_data.json").exists());
}

#[test]
fn config_errors_stop_before_any_compute() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("report");
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "n_trials = 3\nmaster_sed = 4\n").unwrap();
    let out = study(&out_dir, &["--config", s(&bad)]);
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
    assert!(stderr(&out).contains("master_sed"), "{}", stderr(&out));
    assert!(!out_dir.exists());

    fs::write(&bad, "n_trials = 0\n").unwrap();
    assert_eq!(study(&out_dir, &["--config", s(&bad)]).status.code(), Some(EXIT_USAGE));
    let missing = dir.path().join("nope.toml");
    assert_eq!(study(&out_dir, &["--config", s(&missing)]).status.code(), Some(EXIT_USAGE));
    assert_eq!(study(&out_dir, &["--trials", "x"]).status.code(), Some(EXIT_USAGE));
    assert_eq!(limbgo(&["study", "--unknown-flag"]).status.code(), Some(EXIT_USAGE));
    assert!(!out_dir.exists());

    let help = limbgo(&["study", "--help"]);
    assert!(help.status.success());
    let text = String::from_utf8_lossy(&help.stdout);
    assert!(text.contains("--no-measurement-noise") && text.contains("default: 30"));
}

#[test]
fn config_file_is_read_and_flags_override_it() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("study.toml");
    let config = StudyConfig {
        n_trials: 2,
        master_seed: 5,
        ..Default::default()
    };
    fs::write(&cfg, config.to_toml_string().unwrap()).unwrap();
    let from_file = dir.path().join("a");
    assert!(study(&from_file, &["--config", s(&cfg), "--no-noise"]).status.success());
    let per_trial = fs::read_to_string(from_file.join("per_trial.csv")).unwrap();
    assert!(per_trial.lines().any(|l| l.starts_with("2,")));
    let json = fs::read_to_string(from_file.join("summary.json")).unwrap();
    assert!(json.contains("\"master_seed\": 5"));
    assert!(json.contains("\"measurement_noise\": false") && json.contains("\"artefacts\": false"));
}

fn simulated_trial(dir: &Path) -> (PathBuf, TrialRecording) {
    let out = limbgo(&["simulate", "--trials", "1", "--seed", "3", "--out", s(dir)]);
    assert!(out.status.success(), "{}", stderr(&out));
    let path = dir.join("shoulder-rotation_trial_001.csv");
    let rec = read_trial_csv(&path).unwrap();
    (path, rec)
}

#[test]
fn simulate_writes_the_study_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let (_, rec) = simulated_trial(dir.path());
    let config = StudyConfig {
        master_seed: 3,
        ..Default::default()
    };
    let subject = make_synthetic_subject(&config.subject).unwrap();
    let model = calibrate_subject(&subject).unwrap();
    let profile = limbgo_core::sim::MovementProfile::standard(config.movement, &model).unwrap();
    let truth = limbgo_core::sim::generate_ground_truth(&model, &profile).unwrap();
    assert_eq!(rec, simulate_input(&config, &subject, &truth, 1).0);
    assert_eq!(read_trial_csv(&dir.path().join("shoulder-rotation_truth.csv")).unwrap(), truth.recording);
}

#[test]
fn solve_round_trip_matches_in_process() {
    let dir = tempfile::tempdir().unwrap();
    let (trial, rec) = simulated_trial(dir.path());
    let out = calibrate_cli(&dir.path().join("static.csv"), dir.path());
    assert!(out.status.success(), "{}", stderr(&out));
    let model = read_model(&dir.path().join(MODEL_FILE)).unwrap();

    let sol = dir.path().join("solved");
    let out = limbgo(&["solve", "--model", s(&dir.path().join(MODEL_FILE)), "--trial", s(&trial), "--out", s(&sol)]);
    assert!(out.status.success(), "{}", stderr(&out));
    for mode in SolveMode::ALL {
        let expected = render_solution_csv(&model, &solve_trial(&model, &rec, mode).unwrap());
        let got = fs::read_to_string(sol.join(format!("shoulder-rotation_trial_001.{mode}.csv"))).unwrap();
        assert_eq!(got, expected, "{mode}");
    }
}

#[test]
fn solve_reads_the_rate_from_the_header() {
    let dir = tempfile::tempdir().unwrap();
    let (_, rec) = simulated_trial(dir.path());
    let frames: Vec<MarkerFrame> = rec.frames[..5]
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let mut f = f.clone();
            f.time = i as f64 / 200.0;
            f
        })
        .collect();
    let fast = dir.path().join("fast.csv");
    write_trial_csv(&fast, &TrialRecording::new(200.0, frames).unwrap()).unwrap();
    assert!(fs::read_to_string(&fast).unwrap().starts_with("# sample_rate_hz: 200\n"));
    assert!(calibrate_cli(&dir.path().join("static.csv"), dir.path()).status.success());
    let out = limbgo(&["solve", "--model", s(&dir.path().join(MODEL_FILE)), "--trial", s(&fast), "--mode", "go", "--out", s(dir.path())]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = fs::read_to_string(dir.path().join("fast.go.csv")).unwrap();
    assert_eq!(table.lines().count(), 6);
    assert!(table.lines().nth(2).unwrap().starts_with("1,0.005,"));
    assert!(!dir.path().join("fast.segmental.csv").exists());
}

#[test]
fn solve_rejects_unknown_marker_names() {
    let dir = tempfile::tempdir().unwrap();
    let (trial, _) = simulated_trial(dir.path());
    assert!(calibrate_cli(&dir.path().join("static.csv"), dir.path()).status.success());
    let renamed = dir.path().join("renamed.csv");
    fs::write(&renamed, fs::read_to_string(&trial).unwrap().replace("ARM_D1_", "ARM_DX_")).unwrap();
    let out = limbgo(&["solve", "--model", s(&dir.path().join(MODEL_FILE)), "--trial", s(&renamed), "--out", s(dir.path())]);
    assert_eq!(out.status.code(), Some(EXIT_DATA));
    assert!(stderr(&out).contains("unknown marker(s) not present in the model: ARM_DX"), "{}", stderr(&out));
}
