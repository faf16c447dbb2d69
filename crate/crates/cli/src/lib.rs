//! Subcommands behind the `limbgo` binary. Each `cmd_*` function is usable
//! in-process; `run` dispatches a parsed command line.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use limbgo_core::io::{match_markers, read_trial_csv, render_solution_csv, write_trial_csv};
use limbgo_core::model::{calibrate_detailed, CalibrationOptions, CalibrationReport, MarkerSet};
use limbgo_core::report::export_report;
use limbgo_core::sim::{
    calibrate_subject, generate_ground_truth, make_synthetic_subject, run_study, simulate_input, Movement,
    MovementProfile, StudyConfig,
};
use limbgo_core::solver::{solve_trial_with, SolveMode, TrialSolution};
use limbgo_core::{KinematicModel, MarkerFrame, StudyReport, TrialRecording};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_SELF_CHECK: i32 = 3;

pub const MODEL_FILE: &str = "model.json";
const DEFAULT_REPORT_DIR: &str = "limbgo-report";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Data(#[from] limbgo_core::Error),
    #[error("self-check failed: {0}")]
    SelfCheck(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Data(limbgo_core::Error::InvalidConfig(_)) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
            CliError::SelfCheck(_) => EXIT_SELF_CHECK,
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Bone pose estimation from upper-limb skin markers.
///
/// Verbosity is read from the LIMBGO_LOG environment variable
/// (error, warn, info, debug, trace).
#[derive(Debug, Parser)]
#[command(name = "limbgo", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build a subject model from a static trial and two circumduction trials.
    Calibrate(CalibrateArgs),
    /// Write synthetic calibration trials, the noise-free movement and noisy trials as CSV.
    Simulate(StudyArgs),
    /// Run a simulation study and export the report tables.
    Study(StudyArgs),
    /// Estimate joint angles and dislocations for a recorded trial.
    Solve(SolveArgs),
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Static trial CSV; frames are averaged.
    #[arg(long = "static", value_name = "CSV")]
    pub static_trial: PathBuf,
    /// Shoulder circumduction trial CSV.
    #[arg(long, value_name = "CSV")]
    pub shoulder: PathBuf,
    /// Wrist circumduction trial CSV.
    #[arg(long, value_name = "CSV")]
    pub wrist: PathBuf,
    /// Output directory for model.json.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MovementArg {
    ShoulderRotation,
    ProSupination,
}

impl From<MovementArg> for Movement {
    fn from(m: MovementArg) -> Self {
        match m {
            MovementArg::ShoulderRotation => Movement::ShoulderRotation,
            MovementArg::ProSupination => Movement::ProSupination,
        }
    }
}

#[derive(Debug, Clone, Default, Args)]
pub struct StudyArgs {
    /// Study configuration (TOML). Flags below override it.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Master seed for every random draw [default: 1].
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    /// Number of trials [default: 30].
    #[arg(long, value_name = "N")]
    pub trials: Option<usize>,
    /// Simulated movement [default: shoulder-rotation].
    #[arg(long, value_enum)]
    pub movement: Option<MovementArg>,
    /// Output directory [default: the config's output.dir, else ./limbgo-report].
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Disable Gaussian measurement noise.
    #[arg(long)]
    pub no_measurement_noise: bool,
    /// Disable skin-movement artefacts.
    #[arg(long)]
    pub no_artefacts: bool,
    /// Disable both noise sources.
    #[arg(long)]
    pub no_noise: bool,
    /// Also write plot_data.json (study only).
    #[arg(long)]
    pub emit_plot_data: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Go,
    Segmental,
    Both,
}

impl ModeArg {
    pub fn modes(self) -> Vec<SolveMode> {
        match self {
            ModeArg::Go => vec![SolveMode::Go],
            ModeArg::Segmental => vec![SolveMode::Segmental],
            ModeArg::Both => SolveMode::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Model file written by `calibrate`.
    #[arg(long, value_name = "JSON")]
    pub model: PathBuf,
    /// Trial CSV.
    #[arg(long, value_name = "CSV")]
    pub trial: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Both)]
    pub mode: ModeArg,
    /// Output directory; one `<trial>.<mode>.csv` per mode.
    #[arg(long, value_name = "DIR", default_value = ".")]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Calibrate(a) => {
            let (model, report) = cmd_calibrate(&a.static_trial, &a.shoulder, &a.wrist)?;
            let path = a.out.join(MODEL_FILE);
            write_model(&path, &model)?;
            print_calibration(&report);
            println!("wrote {}", path.display());
        }
        Command::Simulate(a) => {
            let config = resolve_study_config(&a)?;
            let dir = output_dir(&a, &config);
            for p in cmd_simulate(&config, &dir)? {
                println!("wrote {}", p.display());
            }
        }
        Command::Study(a) => {
            let config = resolve_study_config(&a)?;
            let dir = output_dir(&a, &config);
            let (report, written) = cmd_study(&config, &dir)?;
            for p in written {
                println!("wrote {}", p.display());
            }
            self_check(&report)?;
        }
        Command::Solve(a) => {
            let model = read_model(&a.model)?;
            let stem = a.trial.file_stem().and_then(|s| s.to_str()).unwrap_or("trial").to_string();
            let recording = read_trial_csv(&a.trial)?;
            create_dir(&a.out)?;
            for mode in a.mode.modes() {
                let solution = cmd_solve(&model, &recording, mode)?;
                let path = a.out.join(format!("{stem}.{mode}.csv"));
                write_text(&path, &render_solution_csv(&model, &solution))?;
                let unconverged = solution.unconverged_frames();
                if unconverged > 0 {
                    log::warn!("{mode}: {unconverged} frame(s) hit the iteration cap");
                }
                for f in &solution.failures {
                    log::warn!("{mode}: frame {} failed: {}", f.index, f.message);
                }
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

/// Reads the three calibration trials and builds a model.
pub fn cmd_calibrate(
    static_trial: &Path,
    shoulder: &Path,
    wrist: &Path,
) -> CliResult<(KinematicModel, CalibrationReport)> {
    let static_frame = mean_frame(&read_trial_csv(static_trial)?);
    let shoulder = read_trial_csv(shoulder)?;
    let wrist = read_trial_csv(wrist)?;
    Ok(calibrate_detailed(
        &static_frame,
        &shoulder,
        &wrist,
        &MarkerSet::default(),
        &CalibrationOptions::default(),
    )?)
}

/// Per-marker mean over the frames in which the marker is present.
pub fn mean_frame(recording: &TrialRecording) -> MarkerFrame {
    let mut out = MarkerFrame::new(0.0);
    for id in recording.marker_names() {
        let seen: Vec<_> = recording.frames.iter().filter_map(|f| f.get(&id)).collect();
        if let Some((first, rest)) = seen.split_first() {
            let total = rest.iter().fold(**first, |acc, p| acc + *p);
            out.set(id, total / seen.len() as f64);
        }
    }
    out
}

/// Writes the subject's calibration trials, the noise-free movement and one
/// noisy CSV per trial. Returns the written paths.
pub fn cmd_simulate(config: &StudyConfig, dir: &Path) -> CliResult<Vec<PathBuf>> {
    config.validate()?;
    let subject = make_synthetic_subject(&config.subject)?;
    let model = calibrate_subject(&subject)?;
    let profile = MovementProfile::standard(config.movement, &model)?;
    let truth = generate_ground_truth(&model, &profile)?;
    create_dir(dir)?;

    let static_trial = TrialRecording::new(1.0, vec![subject.static_frame.clone()])?;
    let mut outputs = vec![
        ("static.csv".to_string(), static_trial),
        ("shoulder_circumduction.csv".to_string(), subject.shoulder_circumduction()),
        ("wrist_circumduction.csv".to_string(), subject.wrist_circumduction()),
        (format!("{}_truth.csv", config.movement), truth.recording.clone()),
    ];
    for trial in 1..=config.n_trials as u64 {
        let (input, _) = simulate_input(config, &subject, &truth, trial);
        outputs.push((format!("{}_trial_{trial:03}.csv", config.movement), input));
    }
    let mut written = Vec::with_capacity(outputs.len());
    for (name, rec) in outputs {
        let path = dir.join(name);
        write_trial_csv(&path, &rec)?;
        written.push(path);
    }
    Ok(written)
}

/// Runs the study and exports the report into `dir`.
pub fn cmd_study(config: &StudyConfig, dir: &Path) -> CliResult<(StudyReport, Vec<PathBuf>)> {
    config.validate()?;
    let report = run_study(config)?;
    create_dir(dir)?;
    let written = export_report(&report, dir, config.output.emit_plot_data)?;
    Ok((report, written))
}

/// GO-mode constraint violations are a failed run.
pub fn self_check(report: &StudyReport) -> CliResult<()> {
    let c = &report.metadata.constraints;
    if c.go_frames_violating > 0 {
        return Err(CliError::SelfCheck(format!(
            "{} of {} GO frames violate a joint constraint (worst normalised violation {:.3e})",
            c.go_frames_violating, c.go_frames_checked, c.max_normalized_violation
        )));
    }
    if !report.metadata.failed_trials.is_empty() {
        log::warn!("{} trial(s) failed and were excluded", report.metadata.failed_trials.len());
    }
    Ok(())
}

pub fn cmd_solve(model: &KinematicModel, recording: &TrialRecording, mode: SolveMode) -> CliResult<TrialSolution> {
    match_markers(model, recording)?;
    Ok(solve_trial_with(model, recording, mode, &Default::default())?)
}

/// Config file (or defaults), then command-line overrides, then validation.
pub fn resolve_study_config(args: &StudyArgs) -> CliResult<StudyConfig> {
    let mut config = match &args.config {
        Some(path) => StudyConfig::from_file(path).map_err(|e| CliError::Config(e.to_string()))?,
        None => StudyConfig::default(),
    };
    if let Some(m) = args.movement {
        config.movement = m.into();
    }
    if let Some(seed) = args.seed {
        config.master_seed = seed;
    }
    if let Some(n) = args.trials {
        config.n_trials = n;
    }
    if args.no_measurement_noise || args.no_noise {
        config.measurement_noise.enabled = false;
    }
    if args.no_artefacts || args.no_noise {
        config.artefacts.enabled = false;
    }
    if args.emit_plot_data {
        config.output.emit_plot_data = true;
    }
    if let Some(out) = &args.out {
        config.output.dir = Some(out.clone());
    }
    config.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(config)
}

fn output_dir(args: &StudyArgs, config: &StudyConfig) -> PathBuf {
    args.out
        .clone()
        .or_else(|| config.output.dir.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_REPORT_DIR))
}

pub fn write_model(path: &Path, model: &KinematicModel) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    let json = serde_json::to_string_pretty(model).expect("model serialises");
    write_text(path, &json)
}

pub fn read_model(path: &Path) -> CliResult<KinematicModel> {
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Data(limbgo_core::Error::Parse {
            path: path.to_path_buf(),
            line: e.line() as u64,
            message: e.to_string(),
        })
    })
}

fn print_calibration(report: &CalibrationReport) {
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(", ");
    println!("shoulder sphere rms (mm): {}", fmt(&report.shoulder_sphere_rms_mm));
    println!("wrist sphere rms (mm): {}", fmt(&report.wrist_sphere_rms_mm));
    println!("static reconstruction error (mm): {:.6}", report.static_reconstruction_error_mm);
}

fn create_dir(dir: &Path) -> CliResult<()> {
    if dir.as_os_str().is_empty() {
        return Ok(());
    }
    fs::create_dir_all(dir).map_err(|e| io_error(dir, e))
}

fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| io_error(path, e))
}

fn io_error(path: &Path, source: std::io::Error) -> CliError {
    CliError::Data(limbgo_core::Error::Io {
        path: path.to_path_buf(),
        source,
    })
}
