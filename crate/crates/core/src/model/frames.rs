//! Anatomical frame construction from static-trial markers and joint centres.
//!
//! Axes follow ISB orientation (X anterior, Y proximal/superior, Z lateral):
//!
//! | segment         | Y                                   | Z                                     | X       | origin          |
//! |-----------------|-------------------------------------|---------------------------------------|---------|-----------------|
//! | trunk           | L3 → C7                             | (L3 → sternum) ∧ Y                    | Y ∧ Z   | C7              |
//! | shoulder girdle | Z ∧ X                               | C7 → acromion                         | (L3 → C7) ∧ Z | C7        |
//! | arm             | elbow centre → shoulder centre      | (elbow → wrist centre) ∧ Y            | Y ∧ Z   | shoulder centre |
//! | forearm         | wrist centre → elbow centre         | (posterior → anterior styloid) ∧ Y    | Y ∧ Z   | elbow centre    |
//! | hand            | hand barycentre → near-wrist marker | (posterior → anterior hand marker) ∧ Y| Y ∧ Z   | wrist centre    |
//! | head            | chin → forehead                     | left → right temple (re-orthogonalised)| Y ∧ Z  | temple midpoint |

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::markers::{MarkerSet, Segment};
use super::recording::MarkerFrame;
use crate::error::{Error, Result};
use crate::geom::{Pose, Rotation};

/// Cross products (of unit vectors) below this magnitude are degenerate.
pub const FRAME_DEGENERACY: f64 = 1e-6;

/// Which construction rule produced a segment frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FrameRule {
    Trunk,
    ShoulderGirdle,
    Arm,
    Forearm,
    Hand,
    Head,
    /// Cluster-fixed frame aligned with the global axes at the static trial.
    Technical,
}

impl FrameRule {
    pub fn for_segment(segment: Segment) -> FrameRule {
        match segment {
            Segment::Trunk => FrameRule::Trunk,
            Segment::Arm => FrameRule::Arm,
            Segment::Forearm => FrameRule::Forearm,
            Segment::Hand => FrameRule::Hand,
        }
    }
}

/// Global joint centres at the static trial (mm).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointCenters {
    pub shoulder: Vector3<f64>,
    pub elbow: Vector3<f64>,
    pub wrist: Vector3<f64>,
}

/// Static-trial anatomical frames as global poses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnatomicalFrames {
    pub trunk: Pose,
    pub arm: Pose,
    pub forearm: Pose,
    pub hand: Pose,
    pub shoulder_girdle: Option<Pose>,
    pub head: Option<Pose>,
}

impl AnatomicalFrames {
    pub fn segment(&self, segment: Segment) -> Pose {
        match segment {
            Segment::Trunk => self.trunk,
            Segment::Arm => self.arm,
            Segment::Forearm => self.forearm,
            Segment::Hand => self.hand,
        }
    }
}

pub fn build_anatomical_frames(
    static_frame: &MarkerFrame,
    centers: &JointCenters,
    markers: &MarkerSet,
) -> Result<AnatomicalFrames> {
    let mut missing: Vec<String> = markers
        .required_static()
        .iter()
        .filter(|id| !static_frame.is_present(id))
        .map(|id| id.to_string())
        .collect();
    missing.dedup();
    if !missing.is_empty() {
        return Err(Error::MissingMarkers(missing));
    }
    let p = |id| static_frame.require(id).expect("checked above");

    let c7 = p(&markers.c7);
    let l3 = p(&markers.l3);
    let sternum = p(&markers.sternum);
    let trunk = frame_from_y_and_z_seed("trunk", c7 - l3, sternum - l3, c7)?;

    let arm = frame_from_y_and_z_seed(
        "arm",
        centers.shoulder - centers.elbow,
        centers.wrist - centers.elbow,
        centers.shoulder,
    )?;

    let forearm = frame_from_y_and_z_seed(
        "forearm",
        centers.elbow - centers.wrist,
        p(&markers.styloid_anterior) - p(&markers.styloid_posterior),
        centers.elbow,
    )?;

    let hand_pts = [
        p(markers.hand_near_wrist()),
        p(markers.hand_posterior()),
        p(markers.hand_anterior()),
    ];
    let barycentre = (hand_pts[0] + hand_pts[1] + hand_pts[2]) / 3.0;
    let hand = frame_from_y_and_z_seed(
        "hand",
        hand_pts[0] - barycentre,
        hand_pts[2] - hand_pts[1],
        centers.wrist,
    )?;

    let shoulder_girdle = match &markers.acromion {
        Some(id) => match static_frame.get(id) {
            Some(acromion) => Some(shoulder_girdle_frame(c7, l3, *acromion)?),
            None => None,
        },
        None => None,
    };

    let head = match &markers.head {
        Some(h) => {
            let ids = [&h.chin, &h.forehead, &h.temple_left, &h.temple_right];
            if ids.iter().all(|id| static_frame.is_present(id)) {
                Some(head_frame(
                    p(&h.chin),
                    p(&h.forehead),
                    p(&h.temple_left),
                    p(&h.temple_right),
                )?)
            } else {
                None
            }
        }
        None => None,
    };

    Ok(AnatomicalFrames {
        trunk,
        arm,
        forearm,
        hand,
        shoulder_girdle,
        head,
    })
}

fn unit(segment: &str, what: &str, v: Vector3<f64>) -> Result<Vector3<f64>> {
    let n = v.norm();
    if !(n.is_finite() && n > 0.0) {
        return Err(Error::DegenerateFrame {
            segment: segment.into(),
            reason: format!("{what} has zero length"),
        });
    }
    Ok(v / n)
}

fn checked_cross(segment: &str, a: Vector3<f64>, b: Vector3<f64>) -> Result<Vector3<f64>> {
    let c = a.cross(&b);
    if c.norm() < FRAME_DEGENERACY {
        return Err(Error::DegenerateFrame {
            segment: segment.into(),
            reason: "defining vectors are parallel".into(),
        });
    }
    Ok(c.normalize())
}

/// Y given directly, Z = seed ∧ Y, X = Y ∧ Z.
fn frame_from_y_and_z_seed(
    segment: &str,
    y: Vector3<f64>,
    z_seed: Vector3<f64>,
    origin: Vector3<f64>,
) -> Result<Pose> {
    let y = unit(segment, "Y axis", y)?;
    let seed = unit(segment, "Z construction vector", z_seed)?;
    let z = checked_cross(segment, seed, y)?;
    let x = y.cross(&z);
    Ok(Pose::new(Rotation::from_axes(x, y, z), origin))
}

fn shoulder_girdle_frame(c7: Vector3<f64>, l3: Vector3<f64>, acromion: Vector3<f64>) -> Result<Pose> {
    let seg = "shoulder girdle";
    let z = unit(seg, "Z axis", acromion - c7)?;
    let up = unit(seg, "L3 → C7", c7 - l3)?;
    let x = checked_cross(seg, up, z)?;
    let y = z.cross(&x);
    Ok(Pose::new(Rotation::from_axes(x, y, z), c7))
}

fn head_frame(
    chin: Vector3<f64>,
    forehead: Vector3<f64>,
    left: Vector3<f64>,
    right: Vector3<f64>,
) -> Result<Pose> {
    let seg = "head";
    let y = unit(seg, "Y axis", forehead - chin)?;
    let z_raw = unit(seg, "temple axis", right - left)?;
    let x = checked_cross(seg, y, z_raw)?;
    let z = x.cross(&y);
    Ok(Pose::new(Rotation::from_axes(x, y, z), (left + right) / 2.0))
}
