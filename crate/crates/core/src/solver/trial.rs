use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::coords::{project, GeneralizedCoordinates};
use super::go::{go_solve_with, trunk_fixed_mask, SolveDiagnostics, SolverOptions, TrunkHandling, WeightUpdate, FREE};
use super::segmental::{segmental_fit, SegmentalFit};
use super::weights::{compute_weights, WeightingScheme};
use crate::error::{Error, Result};
use crate::geom::{wrap_angle, Pose};
use crate::model::{joint_angles, JointName, KinematicModel, TrialRecording};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    /// Global optimisation over the constrained chain.
    Go,
    /// Independent cluster fits (no joint model).
    Segmental,
}

impl SolveMode {
    pub const ALL: [SolveMode; 2] = [SolveMode::Go, SolveMode::Segmental];

    pub fn name(self) -> &'static str {
        match self {
            SolveMode::Go => "go",
            SolveMode::Segmental => "segmental",
        }
    }
}

impl fmt::Display for SolveMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolveMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "go" => Ok(SolveMode::Go),
            "segmental" => Ok(SolveMode::Segmental),
            _ => Err(Error::InvalidConfig(format!("unknown mode '{s}'"))),
        }
    }
}

/// Estimated joint kinematics at one frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEstimate {
    pub index: usize,
    pub time: f64,
    /// Euler angles per joint (shoulder, elbow, wrist), rad, wrapped to (−π, π].
    pub angles: [[f64; 3]; 3],
    /// Dislocation per joint (mm).
    pub dislocations: [f64; 3],
    /// Estimated segment poses.
    pub poses: [Pose; 4],
    /// Segmental residuals of this frame (mm).
    pub segment_residuals: [f64; 4],
    /// Present in GO mode.
    pub solve: Option<SolveDiagnostics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameFailure {
    pub index: usize,
    pub time: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSolution {
    pub mode: SolveMode,
    pub frames: Vec<FrameEstimate>,
    pub failures: Vec<FrameFailure>,
}

impl TrialSolution {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty()
    }

    /// GO frames whose solver stopped without meeting the KKT test.
    pub fn unconverged_frames(&self) -> usize {
        self.frames
            .iter()
            .filter(|f| f.solve.as_ref().is_some_and(|d| !d.converged))
            .count()
    }
}

pub fn solve_trial(model: &KinematicModel, trial: &TrialRecording, mode: SolveMode) -> Result<TrialSolution> {
    solve_trial_with(model, trial, mode, &SolverOptions::default())
}

/// Solves every frame of a trial.
///
/// GO mode starts from the projected segmental fit and warm-starts each later
/// frame from the previous solution. A frame that fails is recorded and the
/// next one starts afresh from its own segmental fit.
pub fn solve_trial_with(
    model: &KinematicModel,
    trial: &TrialRecording,
    mode: SolveMode,
    options: &SolverOptions,
) -> Result<TrialSolution> {
    trial.validate()?;
    options.validate()?;
    let fits: Vec<Result<SegmentalFit>> = trial.frames.iter().map(|f| segmental_fit(model, f)).collect();
    let trial_weights = match options.weighting {
        WeightUpdate::TrialConstant => Some(trial_constant_weights(&fits)),
        WeightUpdate::PerFrame => None,
    };
    let fixed = match options.trunk {
        TrunkHandling::Optimized => FREE,
        TrunkHandling::FixedFromSegmental => trunk_fixed_mask(),
    };

    let mut solution = TrialSolution {
        mode,
        frames: Vec::with_capacity(trial.len()),
        failures: Vec::new(),
    };
    let mut previous: Option<GeneralizedCoordinates> = None;
    for (index, (frame, fit)) in trial.frames.iter().zip(fits).enumerate() {
        let outcome = fit.and_then(|fit| match mode {
            SolveMode::Segmental => Ok(segmental_estimate(model, index, frame.time, &fit)),
            SolveMode::Go => {
                let from_fit = model.coordinates_from_poses(&fit.poses);
                let mut q0 = previous.unwrap_or(from_fit);
                if options.trunk == TrunkHandling::FixedFromSegmental {
                    q0.trunk_angles = from_fit.trunk_angles;
                    q0.trunk_translation = from_fit.trunk_translation;
                }
                let mut v = q0.to_vector();
                project(&mut v, &model.constraints());
                let q0 = GeneralizedCoordinates::from_vector(&v);
                let weights = trial_weights.unwrap_or_else(|| compute_weights(&fit.residuals));
                let (q, diag) = go_solve_with(model, frame, &weights, &q0, options, &fixed)?;
                if !diag.converged {
                    log::debug!(
                        "frame {index}: GO stopped after {} iterations, kkt {:.3e}",
                        diag.iterations,
                        diag.kkt_norm
                    );
                }
                previous = Some(q);
                Ok(go_estimate(model, index, frame.time, &q, &fit, diag))
            }
        });
        match outcome {
            Ok(est) => solution.frames.push(est),
            Err(e) => {
                previous = None;
                solution.failures.push(FrameFailure {
                    index,
                    time: frame.time,
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(solution)
}

fn trial_constant_weights(fits: &[Result<SegmentalFit>]) -> WeightingScheme {
    let mut sum = [0.0; 4];
    let mut n = 0usize;
    for fit in fits.iter().flatten() {
        for (s, r) in sum.iter_mut().zip(fit.residuals) {
            *s += r * r;
        }
        n += 1;
    }
    if n == 0 {
        return WeightingScheme::uniform();
    }
    compute_weights(&sum.map(|s| (s / n as f64).sqrt()))
}

fn segmental_estimate(model: &KinematicModel, index: usize, time: f64, fit: &SegmentalFit) -> FrameEstimate {
    let mut angles = [[0.0; 3]; 3];
    let mut dislocations = [0.0; 3];
    for joint in JointName::ALL {
        let j = joint.index();
        let p = &fit.poses[j];
        let d = &fit.poses[j + 1];
        angles[j] = joint_angles(&model.joint(joint).euler_sequence, p, d).map(wrap_angle);
        dislocations[j] = model.dislocation(joint, p, d);
    }
    FrameEstimate {
        index,
        time,
        angles,
        dislocations,
        poses: fit.poses,
        segment_residuals: fit.residuals,
        solve: None,
    }
}

/// GO angles and dislocations are read from the coordinates, where the
/// constraints hold exactly.
fn go_estimate(
    model: &KinematicModel,
    index: usize,
    time: f64,
    q: &GeneralizedCoordinates,
    fit: &SegmentalFit,
    diag: SolveDiagnostics,
) -> FrameEstimate {
    FrameEstimate {
        index,
        time,
        angles: q.joints.map(|j| j.angles.map(wrap_angle)),
        dislocations: q.joints.map(|j| j.translation.norm()),
        poses: model.segment_poses(q),
        segment_residuals: fit.residuals,
        solve: Some(diag),
    }
}
