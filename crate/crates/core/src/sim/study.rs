use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::movement::{generate_ground_truth, GroundTruth, Movement, MovementProfile};
use super::noise::{
    add_measurement_noise, add_skin_artefacts, ArtefactDirection, ArtefactParams, DrawnArtefact,
    MeasurementNoiseParams, RngStreams, MEASUREMENT_SIGMA_MM,
};
use super::rng::trial_seed;
use super::subject::{make_synthetic_subject, Anthropometry, SyntheticSubject};
use crate::error::{Error, Result};
use crate::model::{calibrate_detailed, CalibrationOptions, KinematicModel, TrialRecording};
use crate::report::{
    error_series, rms, ConstraintSummary, FailedTrial, ReportMetadata, RmsRecord, SolverSummary, StudyReport,
    REPORT_FORMAT, REPORT_VERSION, SD_CONVENTION,
};
use crate::solver::{solve_trial_with, SolveMode, SolverOptions, TrialSolution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseConfig {
    pub enabled: bool,
    pub sigma_mm: f64,
    /// Reuse the first trial's measurement noise in every trial.
    pub freeze_across_trials: bool,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            enabled: true,
            sigma_mm: MEASUREMENT_SIGMA_MM,
            freeze_across_trials: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArtefactConfig {
    pub enabled: bool,
    pub direction: ArtefactDirection,
    pub share_across_axes: bool,
}

impl Default for ArtefactConfig {
    fn default() -> Self {
        ArtefactConfig {
            enabled: true,
            direction: ArtefactDirection::PerAxis,
            share_across_axes: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    pub emit_plot_data: bool,
}

/// Declarative description of one simulation study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StudyConfig {
    pub movement: Movement,
    pub n_trials: usize,
    pub master_seed: u64,
    pub measurement_noise: NoiseConfig,
    pub artefacts: ArtefactConfig,
    pub solver: SolverOptions,
    pub subject: Anthropometry,
    pub output: OutputConfig,
}

impl Default for StudyConfig {
    fn default() -> Self {
        StudyConfig {
            movement: Movement::ShoulderRotation,
            n_trials: 30,
            master_seed: 1,
            measurement_noise: NoiseConfig::default(),
            artefacts: ArtefactConfig::default(),
            solver: SolverOptions::default(),
            subject: Anthropometry::default(),
            output: OutputConfig::default(),
        }
    }
}

impl StudyConfig {
    pub fn for_movement(movement: Movement) -> Self {
        StudyConfig {
            movement,
            ..Default::default()
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: StudyConfig = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::InvalidConfig(m) => Error::InvalidConfig(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::InvalidConfig("n_trials must be ≥ 1".into()));
        }
        let s = self.measurement_noise.sigma_mm;
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::InvalidConfig(format!("sigma_mm must be ≥ 0, got {s}")));
        }
        self.solver.validate()
    }

    /// SHA-256 (hex) of the canonical JSON form, output section excluded.
    pub fn hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output = OutputConfig::default();
        let bytes = serde_json::to_vec(&canonical).expect("config serialises");
        hex::encode(Sha256::digest(&bytes))
    }
}

/// Everything produced by one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRun {
    /// 1-based.
    pub trial: u64,
    pub seed: u64,
    /// Noisy input fed to both estimators.
    pub input: TrialRecording,
    pub artefacts: Vec<DrawnArtefact>,
    /// GO then segmental.
    pub solutions: [TrialSolution; 2],
}

/// Full study output: the report plus per-trial detail.
#[derive(Debug, Clone)]
pub struct StudyRun {
    pub config: StudyConfig,
    pub subject: SyntheticSubject,
    pub model: KinematicModel,
    pub profile: MovementProfile,
    pub truth: GroundTruth,
    pub trials: Vec<TrialRun>,
    pub report: StudyReport,
}

/// Calibrates a model for the synthetic subject from noise-free static and
/// circumduction trials.
pub fn calibrate_subject(subject: &SyntheticSubject) -> Result<KinematicModel> {
    calibrate_detailed(
        &subject.static_frame,
        &subject.shoulder_circumduction(),
        &subject.wrist_circumduction(),
        &subject.markers,
        &CalibrationOptions::default(),
    )
    .map(|(m, _)| m)
}

/// Noisy recording for one 1-based trial: artefacts first, then measurement
/// noise, each only if enabled.
pub fn simulate_input(
    config: &StudyConfig,
    subject: &SyntheticSubject,
    truth: &GroundTruth,
    trial: u64,
) -> (TrialRecording, Vec<DrawnArtefact>) {
    let streams = RngStreams {
        master_seed: config.master_seed,
        trial,
    };
    let (mut input, artefacts) = if config.artefacts.enabled {
        let params = ArtefactParams {
            direction: config.artefacts.direction,
            share_across_axes: config.artefacts.share_across_axes,
            ..ArtefactParams::standard(config.movement, &subject.markers)
        };
        add_skin_artefacts(&truth.recording, &params, streams)
    } else {
        (truth.recording.clone(), Vec::new())
    };
    if config.measurement_noise.enabled {
        let noise = MeasurementNoiseParams {
            mean_mm: 0.0,
            sigma_mm: config.measurement_noise.sigma_mm,
        };
        let noise_streams = RngStreams {
            trial: if config.measurement_noise.freeze_across_trials { 1 } else { trial },
            ..streams
        };
        input = add_measurement_noise(&input, &noise, noise_streams);
    }
    (input, artefacts)
}

pub fn run_study(config: &StudyConfig) -> Result<StudyReport> {
    run_study_detailed(config).map(|r| r.report)
}

pub fn run_study_detailed(config: &StudyConfig) -> Result<StudyRun> {
    config.validate()?;
    let subject = make_synthetic_subject(&config.subject)?;
    let model = calibrate_subject(&subject)?;
    let profile = MovementProfile::standard(config.movement, &model)?;
    let truth = generate_ground_truth(&model, &profile)?;
    let trials: Vec<Result<TrialRun>> = (1..=config.n_trials as u64)
        .into_par_iter()
        .map(|trial| {
            let (input, artefacts) = simulate_input(config, &subject, &truth, trial);
            let go = solve_trial_with(&model, &input, SolveMode::Go, &config.solver)?;
            let seg = solve_trial_with(&model, &input, SolveMode::Segmental, &config.solver)?;
            log::debug!("trial {trial}: {} unconverged GO frames", go.unconverged_frames());
            Ok(TrialRun {
                trial,
                seed: trial_seed(config.master_seed, trial),
                input,
                artefacts,
                solutions: [go, seg],
            })
        })
        .collect();
    let trials = trials.into_iter().collect::<Result<Vec<_>>>()?;
    let report = build_report(config, &model, &truth, &trials)?;
    Ok(StudyRun {
        config: config.clone(),
        subject,
        model,
        profile,
        truth,
        trials,
        report,
    })
}

fn build_report(
    config: &StudyConfig,
    model: &KinematicModel,
    truth: &GroundTruth,
    trials: &[TrialRun],
) -> Result<StudyReport> {
    let truth_angles = truth.angles();
    let constraints = model.constraints();
    let mut records = Vec::new();
    let mut failed = Vec::new();
    let mut solver = SolverSummary::default();
    let mut checks = ConstraintSummary::default();
    let mut iteration_sum = 0usize;

    for run in trials {
        let go = &run.solutions[0];
        for f in &go.frames {
            if let Some(d) = &f.solve {
                solver.go_frames += 1;
                solver.unconverged_frames += usize::from(!d.converged);
                solver.max_iterations = solver.max_iterations.max(d.iterations);
                iteration_sum += d.iterations;
            }
            let worst = constraints
                .iter()
                .enumerate()
                .map(|(j, c)| c.violation(&f.angles[j], f.dislocations[j]))
                .fold(0.0, f64::max);
            checks.go_frames_checked += 1;
            checks.go_frames_violating += usize::from(worst > 0.0);
            checks.max_normalized_violation = checks.max_normalized_violation.max(worst);
        }

        let incomplete: Vec<String> = run
            .solutions
            .iter()
            .filter(|s| !s.is_complete())
            .map(|s| format!("{}: {}", s.mode, s.failures[0].message))
            .collect();
        if !incomplete.is_empty() {
            failed.push(FailedTrial {
                trial: run.trial,
                message: incomplete.join("; "),
            });
            continue;
        }
        for solution in &run.solutions {
            for series in error_series(model, solution, &truth_angles)? {
                records.push(RmsRecord {
                    trial: run.trial,
                    dof: series.dof,
                    mode: series.mode,
                    rms: rms(&series.errors)?,
                });
            }
        }
    }
    if solver.go_frames > 0 {
        solver.mean_iterations = iteration_sum as f64 / solver.go_frames as f64;
    }

    let metadata = ReportMetadata {
        format: REPORT_FORMAT.into(),
        version: REPORT_VERSION,
        config_hash: config.hash(),
        movement: config.movement.to_string(),
        master_seed: config.master_seed,
        n_trials: config.n_trials,
        trial_seeds: trials.iter().map(|t| t.seed).collect(),
        measurement_noise: config.measurement_noise.enabled,
        artefacts: config.artefacts.enabled,
        sd_convention: SD_CONVENTION.into(),
        angle_unit: "rad".into(),
        length_unit: "mm".into(),
        solver,
        constraints: checks,
        failed_trials: failed,
    };
    StudyReport::assemble(metadata, &records)
}
