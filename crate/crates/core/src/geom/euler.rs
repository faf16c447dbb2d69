//! Euler/Cardan angle conventions.
//!
//! Angles `(a, b, c)` of an intrinsic sequence `(i, j, k)` compose as
//! `R = R_i(a) · R_j(b) · R_k(c)`: rotate about `i`, then about the moved `j`,
//! then about the moved `k`. An extrinsic sequence applies the same three
//! elementary rotations about the fixed axes in order, so
//! `R = R_k(c) · R_j(b) · R_i(a)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::rotation::{Axis, Rotation};
use crate::error::{Error, Result};

/// Inputs whose middle-angle cosine (Cardan) or sine (proper Euler) falls
/// below this are treated as gimbal-locked.
pub const GIMBAL_LOCK_THRESHOLD: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EulerKind {
    Intrinsic,
    Extrinsic,
}

/// Ordered rotation axes plus intrinsic/extrinsic flag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct EulerSequence {
    axes: [Axis; 3],
    kind: EulerKind,
}

impl EulerSequence {
    pub fn new(axes: [Axis; 3], kind: EulerKind) -> Result<Self> {
        if axes[0] == axes[1] || axes[1] == axes[2] {
            return Err(Error::InvalidConfig(format!(
                "euler sequence {}{}{} repeats consecutive axes",
                axes[0].label(),
                axes[1].label(),
                axes[2].label()
            )));
        }
        Ok(EulerSequence { axes, kind })
    }

    /// Intrinsic Z–X–Y: the last angle is the rotation about the segment's long (Y) axis.
    pub const ZXY: EulerSequence = EulerSequence {
        axes: [Axis::Z, Axis::X, Axis::Y],
        kind: EulerKind::Intrinsic,
    };

    pub fn axes(&self) -> [Axis; 3] {
        self.axes
    }

    pub fn kind(&self) -> EulerKind {
        self.kind
    }

    /// Position of `axis` in the sequence (first occurrence).
    pub fn position_of(&self, axis: Axis) -> Option<usize> {
        self.axes.iter().position(|&a| a == axis)
    }

    /// Composes three angles into a rotation.
    pub fn compose(&self, angles: [f64; 3]) -> Rotation {
        self.compose_with_axes(angles).0
    }

    /// Composes three angles, also returning the spatial (parent-frame) axis
    /// `u_n` of each angle, so that `∂R/∂θ_n = [u_n]× · R`.
    pub fn compose_with_axes(&self, angles: [f64; 3]) -> (Rotation, [Vector3<f64>; 3]) {
        let [i, j, k] = self.axes;
        let ri = Rotation::about_axis(i, angles[0]);
        let rj = Rotation::about_axis(j, angles[1]);
        let rk = Rotation::about_axis(k, angles[2]);
        match self.kind {
            EulerKind::Intrinsic => {
                let rij = ri * rj;
                let axes = [i.unit(), ri.apply(&j.unit()), rij.apply(&k.unit())];
                (rij * rk, axes)
            }
            EulerKind::Extrinsic => {
                let rkj = rk * rj;
                let axes = [rkj.apply(&i.unit()), rk.apply(&j.unit()), k.unit()];
                (rkj * ri, axes)
            }
        }
    }

    /// Decomposes a rotation into this sequence's angles.
    pub fn decompose(&self, rotation: &Rotation) -> EulerAngles {
        match self.kind {
            EulerKind::Intrinsic => decompose_intrinsic(self.axes, rotation),
            EulerKind::Extrinsic => {
                // Extrinsic (i, j, k) with angles (a, b, c) equals intrinsic (k, j, i) with (c, b, a).
                let [i, j, k] = self.axes;
                let EulerAngles {
                    angles: [c, b, a],
                    gimbal_lock,
                } = decompose_intrinsic([k, j, i], rotation);
                // The gimbal convention zeroes the last intrinsic angle, which is the
                // first extrinsic one; move the combined angle back to the first slot.
                if gimbal_lock {
                    return EulerAngles {
                        angles: decompose_gimbal_first([i, j, k], rotation, b),
                        gimbal_lock,
                    };
                }
                EulerAngles {
                    angles: [a, b, c],
                    gimbal_lock,
                }
            }
        }
    }
}

impl Default for EulerSequence {
    fn default() -> Self {
        EulerSequence::ZXY
    }
}

impl fmt::Display for EulerSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            EulerKind::Intrinsic => "intrinsic",
            EulerKind::Extrinsic => "extrinsic",
        };
        write!(
            f,
            "{}{}{}-{}",
            self.axes[0].label(),
            self.axes[1].label(),
            self.axes[2].label(),
            kind
        )
    }
}

impl FromStr for EulerSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidConfig(format!("cannot parse euler sequence '{s}'"));
        let (letters, kind) = match s.split_once('-') {
            Some((l, "intrinsic")) => (l, EulerKind::Intrinsic),
            Some((l, "extrinsic")) => (l, EulerKind::Extrinsic),
            None => (s, EulerKind::Intrinsic),
            _ => return Err(bad()),
        };
        let axes: Vec<Axis> = letters
            .chars()
            .map(|c| match c.to_ascii_uppercase() {
                'X' => Ok(Axis::X),
                'Y' => Ok(Axis::Y),
                'Z' => Ok(Axis::Z),
                _ => Err(bad()),
            })
            .collect::<Result<_>>()?;
        let axes: [Axis; 3] = axes.try_into().map_err(|_| bad())?;
        EulerSequence::new(axes, kind)
    }
}

impl TryFrom<String> for EulerSequence {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<EulerSequence> for String {
    fn from(s: EulerSequence) -> String {
        s.to_string()
    }
}

/// Result of a decomposition.
///
/// At gimbal lock the last-applied angle is set to 0 and the combined rotation
/// about the aligned axes is assigned to the first angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    pub angles: [f64; 3],
    pub gimbal_lock: bool,
}

/// Decomposes `rotation` with `sequence`. See [`EulerSequence::decompose`].
pub fn euler_angles(rotation: &Rotation, sequence: &EulerSequence) -> EulerAngles {
    sequence.decompose(rotation)
}

/// +1 for cyclic (i, j, k) orderings of (X, Y, Z), −1 otherwise.
fn parity(i: usize, j: usize) -> f64 {
    if (i + 1) % 3 == j {
        1.0
    } else {
        -1.0
    }
}

fn decompose_intrinsic(axes: [Axis; 3], rotation: &Rotation) -> EulerAngles {
    let m = rotation.matrix();
    let i = axes[0].index();
    let j = axes[1].index();
    let s = parity(i, j);
    if axes[0] != axes[2] {
        // Cardan / Tait-Bryan: R = R_i(a) R_j(b) R_k(c), all axes distinct.
        let k = axes[2].index();
        let cos_b = m[(i, i)].hypot(m[(i, j)]);
        let b = (s * m[(i, k)]).atan2(cos_b);
        if cos_b < GIMBAL_LOCK_THRESHOLD {
            let a = (s * m[(k, j)]).atan2(m[(j, j)]);
            return EulerAngles {
                angles: [a, b, 0.0],
                gimbal_lock: true,
            };
        }
        let a = (-s * m[(j, k)]).atan2(m[(k, k)]);
        let c = (-s * m[(i, j)]).atan2(m[(i, i)]);
        EulerAngles {
            angles: [a, b, c],
            gimbal_lock: false,
        }
    } else {
        // Proper Euler: R = R_i(a) R_j(b) R_i(c), k the remaining axis.
        let k = 3 - i - j;
        let sin_b = m[(i, j)].hypot(m[(i, k)]);
        let b = sin_b.atan2(m[(i, i)]);
        if sin_b < GIMBAL_LOCK_THRESHOLD {
            let a = (s * m[(k, j)]).atan2(m[(j, j)]);
            return EulerAngles {
                angles: [a, b, 0.0],
                gimbal_lock: true,
            };
        }
        let a = m[(j, i)].atan2(-s * m[(k, i)]);
        let c = m[(i, j)].atan2(s * m[(i, k)]);
        EulerAngles {
            angles: [a, b, c],
            gimbal_lock: false,
        }
    }
}

/// Gimbal-locked extrinsic case: keep the middle angle, zero the last-applied
/// (third) angle and solve the first angle so that the product matches.
fn decompose_gimbal_first(axes: [Axis; 3], rotation: &Rotation, b: f64) -> [f64; 3] {
    // R = R_j(b) R_i(a) with c = 0, so R_j(b)ᵀ R = R_i(a).
    let r = Rotation::about_axis(axes[1], b).transpose() * *rotation;
    let m = r.matrix();
    let i = axes[0].index();
    let (p, q) = ((i + 1) % 3, (i + 2) % 3);
    let a = m[(q, p)].atan2(m[(p, p)]);
    [a, b, 0.0]
}
