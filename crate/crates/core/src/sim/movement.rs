use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{sin_pi, wrap_angle, Axis};
use crate::model::{JointName, KinematicModel, TrialRecording};
use crate::solver::GeneralizedCoordinates;

/// The two simulated single-DOF movements.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Movement {
    /// Internal-external rotation of the arm about its long axis.
    ShoulderRotation,
    /// Pronation-supination of the forearm about its long axis.
    ProSupination,
}

impl Movement {
    pub const ALL: [Movement; 2] = [Movement::ShoulderRotation, Movement::ProSupination];

    pub fn name(self) -> &'static str {
        match self {
            Movement::ShoulderRotation => "shoulder-rotation",
            Movement::ProSupination => "pro-supination",
        }
    }

    /// Joint whose angle moves.
    pub fn joint(self) -> JointName {
        match self {
            Movement::ShoulderRotation => JointName::Shoulder,
            Movement::ProSupination => JointName::Elbow,
        }
    }
}

impl fmt::Display for Movement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Movement {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Movement::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown movement '{s}'")))
    }
}

/// `angle(t) = initial + amplitude · sin(2π · frequency · t)` on one joint angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MovementProfile {
    pub movement: Movement,
    pub joint: JointName,
    /// Index of the moving angle in the joint's Euler sequence.
    pub angle_index: usize,
    pub initial_angle: f64,
    pub amplitude: f64,
    pub frequency_hz: f64,
    pub duration_s: f64,
    pub sample_rate_hz: f64,
}

pub const AMPLITUDE: f64 = std::f64::consts::FRAC_PI_3;
pub const FREQUENCY_HZ: f64 = 0.5;
pub const DURATION_S: f64 = 2.0;
pub const SAMPLE_RATE_HZ: f64 = 50.0;

impl MovementProfile {
    /// Axial rotation (about Y) of the moving joint, starting from the
    /// calibrated static angle; pro-supination starts from neutral (0).
    pub fn standard(movement: Movement, model: &KinematicModel) -> Result<Self> {
        let joint = movement.joint();
        let seq = model.joint(joint).euler_sequence;
        let angle_index = seq.position_of(Axis::Y).ok_or_else(|| {
            Error::InvalidConfig(format!("{joint} sequence {seq} has no Y rotation"))
        })?;
        let initial_angle = match movement {
            Movement::ShoulderRotation => model.static_coordinates().joints[joint.index()].angles[angle_index],
            Movement::ProSupination => 0.0,
        };
        Ok(MovementProfile {
            movement,
            joint,
            angle_index,
            initial_angle,
            amplitude: AMPLITUDE,
            frequency_hz: FREQUENCY_HZ,
            duration_s: DURATION_S,
            sample_rate_hz: SAMPLE_RATE_HZ,
        })
    }

    pub fn angle_at(&self, t: f64) -> f64 {
        self.initial_angle + self.amplitude * sin_pi(2.0 * self.frequency_hz * t)
    }

    /// Both endpoints included.
    pub fn frame_count(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round() as usize + 1
    }

    pub fn time(&self, index: usize) -> f64 {
        index as f64 / self.sample_rate_hz
    }
}

/// Noise-free trial and the coordinates that generated it.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub recording: TrialRecording,
    pub coordinates: Vec<GeneralizedCoordinates>,
}

impl GroundTruth {
    /// True Euler angles per frame and joint, wrapped to (−π, π].
    pub fn angles(&self) -> Vec<[[f64; 3]; 3]> {
        self.coordinates
            .iter()
            .map(|q| q.joints.map(|j| j.angles.map(wrap_angle)))
            .collect()
    }
}

/// Static posture with one angle following `profile`; all joints stay
/// centred (no dislocation), so every constraint holds at every frame.
pub fn generate_ground_truth(model: &KinematicModel, profile: &MovementProfile) -> Result<GroundTruth> {
    let base = model.static_coordinates();
    let n = profile.frame_count();
    let mut coordinates = Vec::with_capacity(n);
    let mut frames = Vec::with_capacity(n);
    for i in 0..n {
        let t = profile.time(i);
        let mut q = base;
        for j in &mut q.joints {
            j.translation.fill(0.0);
        }
        q.joints[profile.joint.index()].angles[profile.angle_index] = profile.angle_at(t);
        let mut frame = model.predict_markers(&q);
        frame.time = t;
        frames.push(frame);
        coordinates.push(q);
    }
    Ok(GroundTruth {
        recording: TrialRecording::new(profile.sample_rate_hz, frames)?,
        coordinates,
    })
}
