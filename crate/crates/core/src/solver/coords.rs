use nalgebra::{SVector, Vector3};
use serde::{Deserialize, Serialize};

use super::constraint::JointConstraint;

/// Number of scalar generalized coordinates.
pub const DOF: usize = 24;

pub type CoordVector = SVector<f64, DOF>;

/// Rotation (rad, in the joint's Euler sequence) and joint-centre translation
/// (mm, proximal frame) of one joint.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JointCoordinates {
    pub angles: [f64; 3],
    pub translation: Vector3<f64>,
}

/// The optimisation variable: global trunk pose plus one block per joint.
///
/// Flat layout (24 entries): trunk angles, trunk translation, then for the
/// shoulder, elbow and wrist in turn three angles and three translations.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GeneralizedCoordinates {
    pub trunk_angles: [f64; 3],
    pub trunk_translation: Vector3<f64>,
    pub joints: [JointCoordinates; 3],
}

impl GeneralizedCoordinates {
    pub fn to_vector(&self) -> CoordVector {
        let mut v = CoordVector::zeros();
        for i in 0..3 {
            v[i] = self.trunk_angles[i];
            v[3 + i] = self.trunk_translation[i];
        }
        for (j, jc) in self.joints.iter().enumerate() {
            let o = 6 * (j + 1);
            for i in 0..3 {
                v[o + i] = jc.angles[i];
                v[o + 3 + i] = jc.translation[i];
            }
        }
        v
    }

    pub fn from_vector(v: &CoordVector) -> Self {
        let block = |o: usize| JointCoordinates {
            angles: [v[o], v[o + 1], v[o + 2]],
            translation: Vector3::new(v[o + 3], v[o + 4], v[o + 5]),
        };
        GeneralizedCoordinates {
            trunk_angles: [v[0], v[1], v[2]],
            trunk_translation: Vector3::new(v[3], v[4], v[5]),
            joints: [block(6), block(12), block(18)],
        }
    }

    /// Largest normalised constraint violation.
    pub fn max_violation(&self, constraints: &[JointConstraint; 3]) -> f64 {
        self.joints
            .iter()
            .zip(constraints)
            .map(|(jc, c)| c.violation(&jc.angles, jc.translation.norm()))
            .fold(0.0, f64::max)
    }

    pub fn is_feasible(&self, constraints: &[JointConstraint; 3]) -> bool {
        self.max_violation(constraints) == 0.0
    }
}

/// Offset of the first entry of joint `j`'s block in the flat layout.
pub(crate) fn joint_offset(j: usize) -> usize {
    6 * (j + 1)
}

/// Euclidean projection onto the feasible set: the bounded angle is clipped,
/// the translation block is scaled radially into its ball.
pub fn project(v: &mut CoordVector, constraints: &[JointConstraint; 3]) {
    for (j, c) in constraints.iter().enumerate() {
        if let JointConstraint::Cardanic {
            bounded_angle,
            min_rad,
            max_rad,
            max_dislocation_mm,
        } = *c
        {
            let o = joint_offset(j);
            v[o + bounded_angle] = v[o + bounded_angle].clamp(min_rad, max_rad);
            let t = Vector3::new(v[o + 3], v[o + 4], v[o + 5]);
            let t = project_ball(t, max_dislocation_mm);
            v[o + 3] = t.x;
            v[o + 4] = t.y;
            v[o + 5] = t.z;
        }
    }
}

/// Radial projection that never lands outside the ball through rounding.
pub(crate) fn project_ball(t: Vector3<f64>, radius: f64) -> Vector3<f64> {
    let n = t.norm();
    if n <= radius {
        return t;
    }
    if radius == 0.0 {
        return Vector3::zeros();
    }
    let mut s = t * (radius / n);
    while s.norm() > radius {
        s *= 1.0 - f64::EPSILON;
    }
    s
}
