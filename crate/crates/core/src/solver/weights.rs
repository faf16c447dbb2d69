use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Floor on squared segmental residuals (mm²).
pub const WEIGHT_FLOOR: f64 = 0.01;

/// One scalar weight per segment (trunk, arm, forearm, hand), in 1/mm².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 4]", into = "[f64; 4]")]
pub struct WeightingScheme([f64; 4]);

impl WeightingScheme {
    pub fn new(weights: [f64; 4]) -> Result<Self> {
        if weights.iter().all(|w| w.is_finite() && *w > 0.0) {
            Ok(WeightingScheme(weights))
        } else {
            Err(Error::InvalidConfig(format!(
                "segment weights must be positive and finite, got {weights:?}"
            )))
        }
    }

    pub fn uniform() -> Self {
        WeightingScheme([1.0; 4])
    }

    pub fn weights(&self) -> [f64; 4] {
        self.0
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::new(self.0.map(|w| w * factor))
    }
}

impl TryFrom<[f64; 4]> for WeightingScheme {
    type Error = Error;
    fn try_from(w: [f64; 4]) -> Result<Self> {
        Self::new(w)
    }
}

impl From<WeightingScheme> for [f64; 4] {
    fn from(w: WeightingScheme) -> Self {
        w.0
    }
}

/// Inverse-variance weights `1 / max(r², 0.01)`, rescaled to mean 1.
///
/// The rescaling leaves the minimiser of the weighted cost unchanged.
pub fn compute_weights(segment_residuals: &[f64; 4]) -> WeightingScheme {
    let raw = raw_weights(segment_residuals);
    let mean = raw.iter().sum::<f64>() / 4.0;
    WeightingScheme(raw.map(|w| w / mean))
}

/// Weights before normalisation.
pub fn raw_weights(segment_residuals: &[f64; 4]) -> [f64; 4] {
    segment_residuals.map(|r| {
        let r = if r.is_finite() { r.abs() } else { 0.0 };
        1.0 / (r * r).max(WEIGHT_FLOOR)
    })
}
