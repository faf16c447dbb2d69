//! Synthetic right-arm subject with documented geometry.
//!
//! Global frame: X anterior, Y up, Z to the subject's right. The trunk frame
//! is the identity. At the static posture the arm hangs 30° abducted from
//! vertical, the elbow is flexed 45°, the forearm is in neutral
//! pronation-supination and the hand is aligned with the forearm, so the
//! static joint angles are shoulder (0, −abduction, 0), elbow (flexion, 0, 0)
//! and wrist (0, 0, 0) in the Z–X–Y sequence.
//!
//! Cluster markers are laid out in each segment's anatomical frame, as
//! fractions of the segment length along −Y plus fixed surface offsets (mm).

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{fit_rigid_transform, Axis, Pose, Rotation};
use crate::model::{
    build_anatomical_frames, AnatomicalFrames, JointCenters, MarkerFrame, MarkerId, MarkerSet, Segment,
    TrialRecording,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Anthropometry {
    pub upper_arm_mm: f64,
    pub forearm_mm: f64,
    pub hand_mm: f64,
    /// Static arm abduction from vertical.
    pub shoulder_abduction_deg: f64,
    pub elbow_flexion_deg: f64,
}

impl Default for Anthropometry {
    fn default() -> Self {
        Anthropometry {
            upper_arm_mm: 300.0,
            forearm_mm: 260.0,
            hand_mm: 90.0,
            shoulder_abduction_deg: 30.0,
            elbow_flexion_deg: 45.0,
        }
    }
}

const C7: [f64; 3] = [-80.0, 1450.0, 0.0];
const TRUNK_LOCAL: [[f64; 3]; 3] = [[0.0, 0.0, 0.0], [0.0, -450.0, 0.0], [140.0, -150.0, 0.0]];
const SHOULDER_CENTER: [f64; 3] = [-40.0, 1400.0, 180.0];
const ACROMION: [f64; 3] = [-40.0, 1460.0, 190.0];
/// (x, fraction of length, z) in the arm frame.
const ARM_LOCAL: [[f64; 3]; 4] = [
    [-20.0, 0.25, 45.0],
    [25.0, 0.30, 42.0],
    [-20.0, 0.70, 40.0],
    [25.0, 0.75, 38.0],
];
const FOREARM_LOCAL: [[f64; 3]; 3] = [[-15.0, 0.20, 38.0], [-28.0, 0.72, 22.0], [28.0, 0.75, 22.0]];
/// Near-wrist, posterior, anterior.
const HAND_LOCAL: [[f64; 3]; 3] = [[0.0, 0.2, 15.0], [-30.0, 0.9, 15.0], [30.0, 0.9, 15.0]];
const EPICONDYLE_HALF_WIDTH: f64 = 35.0;
const STYLOID_HALF_WIDTH: f64 = 25.0;

/// Ground-truth subject: static trial plus the construction values it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSubject {
    pub anthropometry: Anthropometry,
    pub markers: MarkerSet,
    pub static_frame: MarkerFrame,
    pub joint_centers: JointCenters,
    pub frames: AnatomicalFrames,
    /// Construction coordinates of each tracking cluster in its anatomical frame.
    pub local_coordinates: [Vec<Vector3<f64>>; 4],
    pub arm_proximal: [MarkerId; 2],
    pub arm_distal: [MarkerId; 2],
    pub forearm_proximal: MarkerId,
    pub forearm_distal: [MarkerId; 2],
}

pub fn make_synthetic_subject(config: &Anthropometry) -> Result<SyntheticSubject> {
    let lengths = [
        ("upper arm", config.upper_arm_mm),
        ("forearm", config.forearm_mm),
        ("hand", config.hand_mm),
    ];
    for (name, l) in lengths {
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::DegenerateGeometry(format!("{name} length must be positive, got {l}")));
        }
    }
    for (name, a) in [
        ("shoulder abduction", config.shoulder_abduction_deg),
        ("elbow flexion", config.elbow_flexion_deg),
    ] {
        if !a.is_finite() {
            return Err(Error::DegenerateGeometry(format!("{name} must be finite")));
        }
    }
    let v = |a: [f64; 3]| Vector3::new(a[0], a[1], a[2]);
    let along = |a: [f64; 3], length: f64| Vector3::new(a[0], -a[1] * length, a[2]);

    let trunk = Pose::new(Rotation::identity(), v(C7));
    let arm_rot = Rotation::about_axis(Axis::X, -config.shoulder_abduction_deg.to_radians());
    let shoulder = v(SHOULDER_CENTER);
    let arm = Pose::new(arm_rot, shoulder);
    let elbow = arm.transform_point(&Vector3::new(0.0, -config.upper_arm_mm, 0.0));
    let fa_rot = arm_rot * Rotation::about_axis(Axis::Z, config.elbow_flexion_deg.to_radians());
    let forearm = Pose::new(fa_rot, elbow);
    let wrist = forearm.transform_point(&Vector3::new(0.0, -config.forearm_mm, 0.0));
    let hand = Pose::new(fa_rot, wrist);

    let local_coordinates = [
        TRUNK_LOCAL.iter().map(|&a| v(a)).collect::<Vec<_>>(),
        ARM_LOCAL.iter().map(|&a| along(a, config.upper_arm_mm)).collect(),
        FOREARM_LOCAL.iter().map(|&a| along(a, config.forearm_mm)).collect(),
        HAND_LOCAL.iter().map(|&a| along(a, config.hand_mm)).collect(),
    ];
    let poses = [trunk, arm, forearm, hand];

    let markers = MarkerSet::default();
    let mut static_frame = MarkerFrame::new(0.0);
    for seg in Segment::ALL {
        let local = &local_coordinates[seg.index()];
        for (id, l) in markers.cluster(seg).into_iter().zip(local) {
            static_frame.set(id, poses[seg.index()].transform_point(l));
        }
        fit_rigid_transform(local, local).map_err(|e| {
            Error::DegenerateGeometry(format!("{seg} cluster: {e}"))
        })?;
    }
    let z_arm = arm_rot.column(2);
    let x_fa = fa_rot.column(0);
    static_frame.set(markers.elbow_medial.clone(), elbow - z_arm * EPICONDYLE_HALF_WIDTH);
    static_frame.set(markers.elbow_lateral.clone(), elbow + z_arm * EPICONDYLE_HALF_WIDTH);
    static_frame.set(markers.styloid_posterior.clone(), wrist - x_fa * STYLOID_HALF_WIDTH);
    static_frame.set(markers.styloid_anterior.clone(), wrist + x_fa * STYLOID_HALF_WIDTH);
    if let Some(a) = &markers.acromion {
        static_frame.set(a.clone(), v(ACROMION));
    }

    let joint_centers = JointCenters {
        shoulder,
        elbow,
        wrist,
    };
    let frames = build_anatomical_frames(&static_frame, &joint_centers, &markers)
        .map_err(|e| Error::DegenerateGeometry(e.to_string()))?;

    Ok(SyntheticSubject {
        anthropometry: *config,
        arm_proximal: [markers.arm[0].clone(), markers.arm[1].clone()],
        arm_distal: [markers.arm[2].clone(), markers.arm[3].clone()],
        forearm_proximal: markers.forearm[0].clone(),
        forearm_distal: [markers.forearm[1].clone(), markers.forearm[2].clone()],
        markers,
        static_frame,
        joint_centers,
        frames,
        local_coordinates,
    })
}

/// Frames in each generated circumduction trial.
pub const CIRCUMDUCTION_FRAMES: usize = 150;
/// Sample rate of generated trials (Hz).
pub const SAMPLE_RATE: f64 = 50.0;

impl SyntheticSubject {
    /// Arm circles about the shoulder centre; trunk still.
    pub fn shoulder_circumduction(&self) -> TrialRecording {
        self.circumduction(Segment::Trunk, Segment::Arm, self.joint_centers.shoulder)
    }

    /// Hand circles about the wrist centre; forearm still.
    pub fn wrist_circumduction(&self) -> TrialRecording {
        self.circumduction(Segment::Forearm, Segment::Hand, self.joint_centers.wrist)
    }

    /// Distal markers swept on an outward spiral of cones (15° to 30° about
    /// the segment's long axis, three turns) around `center`.
    fn circumduction(&self, fixed: Segment, moving: Segment, center: Vector3<f64>) -> TrialRecording {
        let pose = self.frames.segment(moving);
        let (x, z) = (pose.rotation.column(0), pose.rotation.column(2));
        let fixed_ids = self.markers.cluster(fixed);
        let moving_ids = self.markers.cluster(moving);
        let n = CIRCUMDUCTION_FRAMES;
        let frames = (0..n)
            .map(|k| {
                let s = k as f64 / n as f64;
                let phase = std::f64::consts::TAU * 3.0 * s;
                let cone = (15.0 + 15.0 * s).to_radians();
                let axis = x * phase.cos() + z * phase.sin();
                let rot = Rotation::from_rotation_vector(&(axis * cone));
                let mut frame = MarkerFrame::new(k as f64 / SAMPLE_RATE);
                for id in &fixed_ids {
                    frame.set(id.clone(), *self.static_frame.get(id).expect("static cluster"));
                }
                for id in &moving_ids {
                    let p = self.static_frame.get(id).expect("static cluster");
                    frame.set(id.clone(), center + rot.apply(&(p - center)));
                }
                frame
            })
            .collect();
        TrialRecording::new(SAMPLE_RATE, frames).expect("uniform generated times")
    }
}
