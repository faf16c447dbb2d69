use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Axis, EulerSequence};

/// ±1° joint laxity on the bounded rotation.
pub const LAXITY_ANGLE: f64 = std::f64::consts::PI / 180.0;
/// Maximum translation between adjacent segments at a constrained joint (mm).
pub const MAX_DISLOCATION: f64 = 2.0;

/// Laxity constraint of one joint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JointConstraint {
    Unconstrained,
    /// Two free rotations, one rotation boxed to `[min_rad, max_rad]`, and the
    /// joint-centre translation confined to a ball of `max_dislocation_mm`.
    Cardanic {
        /// Index of the bounded angle within the joint's Euler sequence.
        bounded_angle: usize,
        min_rad: f64,
        max_rad: f64,
        max_dislocation_mm: f64,
    },
}

impl JointConstraint {
    /// Cardanic joint whose rotation about `axis` is held within ±1° and whose
    /// translation is held within 2 mm.
    pub fn cardanic_about(sequence: &EulerSequence, axis: Axis) -> Result<Self> {
        let bounded_angle = sequence.position_of(axis).ok_or_else(|| {
            Error::InvalidConfig(format!("sequence {sequence} has no {} axis", axis.label()))
        })?;
        Ok(JointConstraint::Cardanic {
            bounded_angle,
            min_rad: -LAXITY_ANGLE,
            max_rad: LAXITY_ANGLE,
            max_dislocation_mm: MAX_DISLOCATION,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if let JointConstraint::Cardanic {
            bounded_angle,
            min_rad,
            max_rad,
            max_dislocation_mm,
        } = *self
        {
            if bounded_angle > 2 {
                return Err(Error::InvalidConfig(format!(
                    "bounded angle index {bounded_angle} out of range"
                )));
            }
            if !(min_rad.is_finite() && max_rad.is_finite() && min_rad <= max_rad) {
                return Err(Error::InvalidConfig(format!(
                    "invalid angle interval [{min_rad}, {max_rad}]"
                )));
            }
            if !(max_dislocation_mm.is_finite() && max_dislocation_mm >= 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "invalid dislocation bound {max_dislocation_mm}"
                )));
            }
        }
        Ok(())
    }

    /// Violation normalised by the bound: angle excess over the half-width of
    /// the interval, dislocation excess over the ball radius. Zero when feasible.
    pub fn violation(&self, angles: &[f64; 3], translation_norm: f64) -> f64 {
        match *self {
            JointConstraint::Unconstrained => 0.0,
            JointConstraint::Cardanic {
                bounded_angle,
                min_rad,
                max_rad,
                max_dislocation_mm,
            } => {
                let a = angles[bounded_angle];
                let half = ((max_rad - min_rad) / 2.0).max(f64::MIN_POSITIVE);
                let angle_excess = (a - max_rad).max(min_rad - a).max(0.0) / half;
                let trans_excess = if max_dislocation_mm > 0.0 {
                    (translation_norm - max_dislocation_mm).max(0.0) / max_dislocation_mm
                } else {
                    translation_norm
                };
                angle_excess.max(trans_excess)
            }
        }
    }
}
