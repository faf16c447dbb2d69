use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use nalgebra::Vector3;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::movement::Movement;
use super::rng::{stream, Purpose, StreamKey};
use crate::geom::sin_pi;
use crate::model::{MarkerId, MarkerSet, TrialRecording};

/// Per-coordinate standard deviation of measurement noise (mm).
pub const MEASUREMENT_SIGMA_MM: f64 = 0.615;
/// Artefact angular frequency range (rad/s).
pub const OMEGA_RANGE: (f64, f64) = (PI, 3.0 * PI);
/// Artefact amplitude schedule frequency (Hz), that of the movement.
pub const SCHEDULE_FREQUENCY_HZ: f64 = 0.5;

/// Where the random streams of one trial come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStreams {
    pub master_seed: u64,
    pub trial: u64,
}

impl RngStreams {
    fn get(&self, purpose: Purpose, marker: &MarkerId, axis: u64) -> rand_chacha::ChaCha8Rng {
        stream(
            self.master_seed,
            StreamKey {
                trial: self.trial,
                purpose,
                marker: marker_label(marker),
                axis,
            },
        )
    }
}

/// Stable 64-bit label of a marker name (FNV-1a).
fn marker_label(id: &MarkerId) -> u64 {
    id.as_str()
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeasurementNoiseParams {
    pub mean_mm: f64,
    pub sigma_mm: f64,
}

impl Default for MeasurementNoiseParams {
    fn default() -> Self {
        MeasurementNoiseParams {
            mean_mm: 0.0,
            sigma_mm: MEASUREMENT_SIGMA_MM,
        }
    }
}

/// Independent Gaussian perturbation of every present coordinate of every frame.
pub fn add_measurement_noise(
    recording: &TrialRecording,
    params: &MeasurementNoiseParams,
    streams: RngStreams,
) -> TrialRecording {
    let mut out = recording.clone();
    if params.sigma_mm == 0.0 && params.mean_mm == 0.0 {
        return out;
    }
    let normal = Normal::new(params.mean_mm, params.sigma_mm).expect("finite non-negative sigma");
    for id in recording.marker_names() {
        for axis in 0..3 {
            let mut rng = streams.get(Purpose::MeasurementNoise, &id, axis as u64);
            for frame in &mut out.frames {
                let e: f64 = normal.sample(&mut rng);
                if let Some(p) = frame.get_mut(&id) {
                    p[axis] += e;
                }
            }
        }
    }
    out
}

/// How an artefact displaces its marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ArtefactDirection {
    /// Independent sinusoid on each global axis.
    #[default]
    PerAxis,
    /// One sinusoid along a random fixed unit direction per marker.
    FixedDirection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtefactParams {
    /// Peak amplitude `B_m` per marker (mm); markers not listed are untouched.
    pub amplitudes: BTreeMap<MarkerId, f64>,
    pub direction: ArtefactDirection,
    /// Draw one (ω, φ) per marker instead of one per axis.
    pub share_across_axes: bool,
}

impl ArtefactParams {
    /// Artefact amplitudes of the two simulated movements.
    ///
    /// Shoulder rotation: arm proximal markers 20 mm, arm distal 10 mm.
    /// Pro-supination: forearm proximal 20 mm, forearm distal 10 mm, arm 5 mm.
    pub fn standard(movement: Movement, markers: &MarkerSet) -> Self {
        let mut amplitudes = BTreeMap::new();
        match movement {
            Movement::ShoulderRotation => {
                for (i, id) in markers.arm.iter().enumerate() {
                    amplitudes.insert(id.clone(), if i < 2 { 20.0 } else { 10.0 });
                }
            }
            Movement::ProSupination => {
                for (i, id) in markers.forearm.iter().enumerate() {
                    amplitudes.insert(id.clone(), if i < 1 { 20.0 } else { 10.0 });
                }
                for id in &markers.arm {
                    amplitudes.insert(id.clone(), 5.0);
                }
            }
        }
        ArtefactParams {
            amplitudes,
            direction: ArtefactDirection::PerAxis,
            share_across_axes: false,
        }
    }
}

/// Parameters drawn for one marker's artefact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DrawnArtefact {
    pub marker: MarkerId,
    pub amplitude_mm: f64,
    /// Per global axis; all three equal when shared.
    pub omega: [f64; 3],
    pub phase: [f64; 3],
    /// Set for [`ArtefactDirection::FixedDirection`].
    pub direction: Option<Vector3<f64>>,
}

impl DrawnArtefact {
    /// Displacement at time `t`: `B·|sin(2π·0.5·t)|·sin(ωt + φ)` per axis,
    /// or along the fixed direction.
    pub fn displacement(&self, t: f64) -> Vector3<f64> {
        let a = self.amplitude_mm * sin_pi(2.0 * SCHEDULE_FREQUENCY_HZ * t).abs();
        match self.direction {
            Some(d) => d * (a * (self.omega[0] * t + self.phase[0]).sin()),
            None => Vector3::from_fn(|k, _| a * (self.omega[k] * t + self.phase[k]).sin()),
        }
    }
}

pub fn draw_artefacts(params: &ArtefactParams, streams: RngStreams) -> Vec<DrawnArtefact> {
    params
        .amplitudes
        .iter()
        .filter(|(_, b)| **b > 0.0)
        .map(|(id, &b)| {
            let draw_axes = if params.share_across_axes || params.direction == ArtefactDirection::FixedDirection {
                1
            } else {
                3
            };
            let mut omega = [0.0; 3];
            let mut phase = [0.0; 3];
            for axis in 0..3 {
                let src = if axis < draw_axes { axis } else { 0 };
                omega[axis] = streams
                    .get(Purpose::ArtefactFrequency, id, src as u64)
                    .random_range(OMEGA_RANGE.0..=OMEGA_RANGE.1);
                phase[axis] = streams
                    .get(Purpose::ArtefactPhase, id, src as u64)
                    .random_range(0.0..TAU);
            }
            let direction = (params.direction == ArtefactDirection::FixedDirection).then(|| {
                let mut rng = streams.get(Purpose::ArtefactDirection, id, 0);
                loop {
                    let v = Vector3::from_fn(|_, _| StandardNormal.sample(&mut rng));
                    let n: f64 = v.norm();
                    if n > 1e-12 {
                        break v / n;
                    }
                }
            });
            DrawnArtefact {
                marker: id.clone(),
                amplitude_mm: b,
                omega,
                phase,
                direction,
            }
        })
        .collect()
}

/// Adds skin-movement artefacts; returns the drawn parameters.
pub fn add_skin_artefacts(
    recording: &TrialRecording,
    params: &ArtefactParams,
    streams: RngStreams,
) -> (TrialRecording, Vec<DrawnArtefact>) {
    let drawn = draw_artefacts(params, streams);
    let mut out = recording.clone();
    for frame in &mut out.frames {
        let t = frame.time;
        for art in &drawn {
            if let Some(p) = frame.get_mut(&art.marker) {
                *p += art.displacement(t);
            }
        }
    }
    (out, drawn)
}
