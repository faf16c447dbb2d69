use nalgebra::{DMatrix, Vector3};
use serde::{Deserialize, Serialize};

use super::frames::FrameRule;
use super::markers::{JointName, MarkerSet, Segment};
use super::recording::{MarkerFrame, MarkerId};
use crate::error::{Error, Result};
use crate::geom::{euler_angles, EulerSequence, Pose, Rotation};
use crate::solver::{GeneralizedCoordinates, JointConstraint, JointCoordinates, DOF};

pub const MODEL_FORMAT: &str = "limbgo-kinematic-model";
pub const MODEL_VERSION: u32 = 1;

/// Units used throughout the serialized model.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Units {
    pub length: String,
    pub angle: String,
}

impl Default for Units {
    fn default() -> Self {
        Units {
            length: "mm".into(),
            angle: "rad".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentDefinition {
    pub segment: Segment,
    pub frame_rule: FrameRule,
    pub markers: Vec<MarkerId>,
    /// Marker positions in the segment's anatomical frame.
    #[serde(rename = "local_coordinates_mm")]
    pub local_coordinates: Vec<Vector3<f64>>,
}

impl SegmentDefinition {
    /// Cluster-fixed frame that coincides with the global frame at the static trial.
    pub fn technical(segment: Segment, markers: Vec<MarkerId>, static_frame: &MarkerFrame) -> Result<Self> {
        let local_coordinates = markers
            .iter()
            .map(|id| static_frame.require(id))
            .collect::<Result<Vec<_>>>()?;
        Ok(SegmentDefinition {
            segment,
            frame_rule: FrameRule::Technical,
            markers,
            local_coordinates,
        })
    }

    /// Observed positions for this cluster, `None` where a marker is absent.
    pub fn observed(&self, frame: &MarkerFrame) -> Vec<Option<Vector3<f64>>> {
        self.markers.iter().map(|id| frame.get(id).copied()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointDefinition {
    pub joint: JointName,
    pub proximal: Segment,
    pub distal: Segment,
    #[serde(rename = "center_in_proximal_mm")]
    pub center_in_proximal: Vector3<f64>,
    #[serde(rename = "center_in_distal_mm")]
    pub center_in_distal: Vector3<f64>,
    pub euler_sequence: EulerSequence,
    pub constraint: JointConstraint,
}

/// Calibrated trunk → arm → forearm → hand chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KinematicModel {
    pub format: String,
    pub version: u32,
    pub units: Units,
    pub marker_set: MarkerSet,
    /// Sequence parameterising the global trunk orientation.
    pub trunk_sequence: EulerSequence,
    /// One per segment, proximal to distal.
    pub segments: Vec<SegmentDefinition>,
    /// Shoulder, elbow, wrist.
    pub joints: Vec<JointDefinition>,
    /// Global segment poses at the static trial.
    pub static_posture: Vec<Pose>,
}

/// Poses and derivative data of one forward-kinematics evaluation.
#[derive(Debug, Clone)]
pub struct ChainState {
    pub poses: [Pose; 4],
    /// Global joint centres as carried by the proximal segment (including translation).
    pub joint_centers: [Vector3<f64>; 3],
    trunk_axes: [Vector3<f64>; 3],
    joint_axes: [[Vector3<f64>; 3]; 3],
}

impl KinematicModel {
    pub fn new(
        marker_set: MarkerSet,
        segments: Vec<SegmentDefinition>,
        joints: Vec<JointDefinition>,
        static_posture: Vec<Pose>,
    ) -> Result<Self> {
        let model = KinematicModel {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            units: Units::default(),
            marker_set,
            trunk_sequence: EulerSequence::ZXY,
            segments,
            joints,
            static_posture,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.format != MODEL_FORMAT {
            return bad(format!("unexpected model format '{}'", self.format));
        }
        if self.segments.len() != 4 || self.static_posture.len() != 4 || self.joints.len() != 3 {
            return bad("model must have 4 segments, 4 static poses and 3 joints".into());
        }
        for (seg, def) in Segment::ALL.iter().zip(&self.segments) {
            if def.segment != *seg {
                return bad(format!("segment order: expected {seg}, found {}", def.segment));
            }
            if def.markers.len() != def.local_coordinates.len() || def.markers.len() < 3 {
                return bad(format!("segment {seg} needs ≥3 markers with coordinates"));
            }
        }
        for (jn, def) in JointName::ALL.iter().zip(&self.joints) {
            if def.joint != *jn || def.proximal != jn.proximal() || def.distal != jn.distal() {
                return bad(format!("joint order/connectivity broken at {jn}"));
            }
            def.constraint.validate()?;
        }
        let mut names: Vec<&MarkerId> = self.segments.iter().flat_map(|s| &s.markers).collect();
        let n = names.len();
        names.sort();
        names.dedup();
        if names.len() != n {
            return bad("marker names must be unique across clusters".into());
        }
        Ok(())
    }

    pub fn segment(&self, segment: Segment) -> &SegmentDefinition {
        &self.segments[segment.index()]
    }

    pub fn joint(&self, joint: JointName) -> &JointDefinition {
        &self.joints[joint.index()]
    }

    pub fn constraints(&self) -> [JointConstraint; 3] {
        [
            self.joints[0].constraint,
            self.joints[1].constraint,
            self.joints[2].constraint,
        ]
    }

    /// Tracked markers in chain order, with their segment.
    pub fn tracked_markers(&self) -> Vec<(Segment, &MarkerId)> {
        self.segments
            .iter()
            .flat_map(|s| s.markers.iter().map(move |m| (s.segment, m)))
            .collect()
    }

    pub fn marker_count(&self) -> usize {
        self.segments.iter().map(|s| s.markers.len()).sum()
    }

    /// Observations aligned with [`Self::tracked_markers`].
    pub fn observations(&self, frame: &MarkerFrame) -> Vec<Option<Vector3<f64>>> {
        self.segments.iter().flat_map(|s| s.observed(frame)).collect()
    }

    /// Coordinates reproducing the static posture.
    pub fn static_coordinates(&self) -> GeneralizedCoordinates {
        self.coordinates_from_poses(&[
            self.static_posture[0],
            self.static_posture[1],
            self.static_posture[2],
            self.static_posture[3],
        ])
    }

    /// Coordinates whose forward kinematics reproduce the given segment poses
    /// (exactly, as long as no Euler decomposition is gimbal-locked).
    pub fn coordinates_from_poses(&self, poses: &[Pose; 4]) -> GeneralizedCoordinates {
        let trunk = poses[0];
        let mut joints = [JointCoordinates::default(); 3];
        for (j, def) in self.joints.iter().enumerate() {
            let p = &poses[j];
            let d = &poses[j + 1];
            let relative = p.rotation.transpose() * d.rotation;
            let angles = euler_angles(&relative, &def.euler_sequence).angles;
            let distal_center = d.transform_point(&def.center_in_distal);
            let translation = p.inverse_transform_point(&distal_center) - def.center_in_proximal;
            joints[j] = JointCoordinates {
                angles,
                translation,
            };
        }
        GeneralizedCoordinates {
            trunk_angles: euler_angles(&trunk.rotation, &self.trunk_sequence).angles,
            trunk_translation: trunk.translation,
            joints,
        }
    }

    pub fn chain_state(&self, q: &GeneralizedCoordinates) -> ChainState {
        let (trunk_rot, trunk_axes) = self.trunk_sequence.compose_with_axes(q.trunk_angles);
        let mut poses = [Pose::new(trunk_rot, q.trunk_translation); 4];
        let mut joint_centers = [Vector3::zeros(); 3];
        let mut joint_axes = [[Vector3::zeros(); 3]; 3];
        for (j, def) in self.joints.iter().enumerate() {
            let p = poses[j];
            let jc = &q.joints[j];
            let center = p.transform_point(&(def.center_in_proximal + jc.translation));
            let (rel, axes) = def.euler_sequence.compose_with_axes(jc.angles);
            let rot = p.rotation * rel;
            poses[j + 1] = Pose::new(rot, center - rot.apply(&def.center_in_distal));
            joint_centers[j] = center;
            joint_axes[j] = axes.map(|a| p.rotation.apply(&a));
        }
        ChainState {
            poses,
            joint_centers,
            trunk_axes,
            joint_axes,
        }
    }

    pub fn segment_poses(&self, q: &GeneralizedCoordinates) -> [Pose; 4] {
        self.chain_state(q).poses
    }

    /// Predicted global positions of all tracked markers, chain order.
    pub fn predict_positions(&self, q: &GeneralizedCoordinates) -> Vec<Vector3<f64>> {
        let poses = self.segment_poses(q);
        self.segments
            .iter()
            .flat_map(|s| {
                let pose = poses[s.segment.index()];
                s.local_coordinates.iter().map(move |l| pose.transform_point(l))
            })
            .collect()
    }

    pub fn predict_markers(&self, q: &GeneralizedCoordinates) -> MarkerFrame {
        let mut frame = MarkerFrame::new(0.0);
        for ((_, id), p) in self.tracked_markers().into_iter().zip(self.predict_positions(q)) {
            frame.set(id.clone(), p);
        }
        frame
    }

    /// Predicted positions and `∂position/∂q` (3·markers × 24), chain order.
    pub fn predict_with_jacobian(
        &self,
        q: &GeneralizedCoordinates,
    ) -> (Vec<Vector3<f64>>, DMatrix<f64>) {
        let state = self.chain_state(q);
        let n = self.marker_count();
        let mut positions = Vec::with_capacity(n);
        let mut jac = DMatrix::zeros(3 * n, DOF);
        let trunk_origin = state.poses[0].translation;
        let mut row = 0;
        for def in &self.segments {
            let s = def.segment.index();
            let pose = state.poses[s];
            for local in &def.local_coordinates {
                let p = pose.transform_point(local);
                let mut set_col = |col: usize, d: Vector3<f64>| {
                    for k in 0..3 {
                        jac[(row + k, col)] = d[k];
                    }
                };
                for n in 0..3 {
                    set_col(n, state.trunk_axes[n].cross(&(p - trunk_origin)));
                    set_col(3 + n, Vector3::ith(n, 1.0));
                }
                for j in 0..s {
                    let o = 6 * (j + 1);
                    let g = state.joint_centers[j];
                    let prox_rot = state.poses[j].rotation;
                    for n in 0..3 {
                        set_col(o + n, state.joint_axes[j][n].cross(&(p - g)));
                        set_col(o + 3 + n, prox_rot.column(n));
                    }
                }
                positions.push(p);
                row += 3;
            }
        }
        (positions, jac)
    }

    /// Relative Euler angles of a joint from two segment poses.
    pub fn joint_angles(&self, joint: JointName, proximal: &Pose, distal: &Pose) -> [f64; 3] {
        joint_angles(&self.joint(joint).euler_sequence, proximal, distal)
    }

    /// Distance between the joint centre carried by each adjacent segment (mm).
    pub fn dislocation(&self, joint: JointName, proximal: &Pose, distal: &Pose) -> f64 {
        let def = self.joint(joint);
        (proximal.transform_point(&def.center_in_proximal) - distal.transform_point(&def.center_in_distal))
            .norm()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let model: KinematicModel =
            serde_json::from_str(s).map_err(|e| Error::InvalidConfig(format!("model: {e}")))?;
        model.validate()?;
        Ok(model)
    }
}

/// Euler angles of `proximalᵀ · distal` in `sequence`.
pub fn joint_angles(sequence: &EulerSequence, proximal: &Pose, distal: &Pose) -> [f64; 3] {
    let rel: Rotation = proximal.rotation.transpose() * distal.rotation;
    euler_angles(&rel, sequence).angles
}

/// Free-function form of [`KinematicModel::dislocation`].
pub fn dislocation(model: &KinematicModel, proximal: &Pose, distal: &Pose, joint: JointName) -> f64 {
    model.dislocation(joint, proximal, distal)
}

/// Free-function form of [`KinematicModel::predict_markers`].
pub fn predict_markers(model: &KinematicModel, q: &GeneralizedCoordinates) -> MarkerFrame {
    model.predict_markers(q)
}
