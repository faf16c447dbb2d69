use std::collections::BTreeMap;
use std::fmt;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Name of a skin marker, e.g. `C7` or `ARM_P1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MarkerId(String);

impl MarkerId {
    pub fn new(name: impl Into<String>) -> Self {
        MarkerId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for MarkerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for MarkerId {
    fn from(s: &str) -> Self {
        MarkerId::new(s)
    }
}

/// One time sample of global marker positions (mm). Absent markers have no entry.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MarkerFrame {
    pub time: f64,
    positions: BTreeMap<MarkerId, Vector3<f64>>,
}

impl MarkerFrame {
    pub fn new(time: f64) -> Self {
        MarkerFrame {
            time,
            positions: BTreeMap::new(),
        }
    }

    /// Records a position; non-finite positions mark the marker absent.
    pub fn set(&mut self, id: MarkerId, position: Vector3<f64>) {
        if position.iter().all(|v| v.is_finite()) {
            self.positions.insert(id, position);
        } else {
            self.positions.remove(&id);
        }
    }

    pub fn with(mut self, id: impl Into<MarkerId>, position: Vector3<f64>) -> Self {
        self.set(id.into(), position);
        self
    }

    pub fn remove(&mut self, id: &MarkerId) -> Option<Vector3<f64>> {
        self.positions.remove(id)
    }

    pub fn get(&self, id: &MarkerId) -> Option<&Vector3<f64>> {
        self.positions.get(id)
    }

    pub fn get_mut(&mut self, id: &MarkerId) -> Option<&mut Vector3<f64>> {
        self.positions.get_mut(id)
    }

    pub fn is_present(&self, id: &MarkerId) -> bool {
        self.positions.contains_key(id)
    }

    /// Position of a marker that must be present.
    pub fn require(&self, id: &MarkerId) -> Result<Vector3<f64>> {
        self.positions
            .get(id)
            .copied()
            .ok_or_else(|| Error::MissingMarkers(vec![id.to_string()]))
    }

    pub fn markers(&self) -> impl Iterator<Item = &MarkerId> {
        self.positions.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MarkerId, &Vector3<f64>)> {
        self.positions.iter()
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Uniformly sampled series of marker frames.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecording {
    /// Hz
    pub sample_rate: f64,
    pub frames: Vec<MarkerFrame>,
}

impl TrialRecording {
    /// Builds a recording and checks that times are strictly increasing at
    /// `1 / sample_rate` spacing.
    pub fn new(sample_rate: f64, frames: Vec<MarkerFrame>) -> Result<Self> {
        let rec = TrialRecording {
            sample_rate,
            frames,
        };
        rec.validate()?;
        Ok(rec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate.is_finite() && self.sample_rate > 0.0) {
            return Err(Error::InvalidRecording(format!(
                "sample rate {} Hz is not positive",
                self.sample_rate
            )));
        }
        let dt = 1.0 / self.sample_rate;
        for (k, pair) in self.frames.windows(2).enumerate() {
            let step = pair[1].time - pair[0].time;
            if step <= 0.0 {
                return Err(Error::InvalidRecording(format!(
                    "time not strictly increasing at frame {}",
                    k + 1
                )));
            }
            if (step - dt).abs() > 1e-6 * dt.max(1.0) {
                return Err(Error::InvalidRecording(format!(
                    "frame {} spacing {step} s differs from 1/{} Hz",
                    k + 1,
                    self.sample_rate
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Union of marker names across all frames.
    pub fn marker_names(&self) -> Vec<MarkerId> {
        let mut names: Vec<MarkerId> = self
            .frames
            .iter()
            .flat_map(|f| f.markers().cloned())
            .collect();
        names.sort();
        names.dedup();
        names
    }
}
