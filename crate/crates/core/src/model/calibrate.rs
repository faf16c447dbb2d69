//! Model calibration from a static trial and two functional (circumduction) trials.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::frames::{build_anatomical_frames, FrameRule, JointCenters};
use super::kinematics::{JointDefinition, KinematicModel, SegmentDefinition};
use super::markers::{JointName, MarkerSet, Segment};
use super::recording::{MarkerFrame, MarkerId, TrialRecording};
use crate::error::{Error, Result};
use crate::geom::{fit_rigid_transform, fit_sphere, Axis, EulerSequence, SphereFit};
use crate::solver::JointConstraint;

/// Added to squared sphere residuals before inverting them into weights (mm²).
pub const CENTER_WEIGHT_FLOOR: f64 = 1e-6;

/// Midpoint of the two epicondyle markers.
pub fn elbow_center(medial: &Vector3<f64>, lateral: &Vector3<f64>) -> Vector3<f64> {
    (medial + lateral) / 2.0
}

/// Functional joint centre from a circumduction trial, in `proximal`'s local frame.
///
/// Each moving marker's path, expressed in the proximal segment frame, is
/// sphere-fitted; the per-marker centres are averaged with weights
/// `1 / (rms² + 1e-6 mm²)`.
pub fn estimate_joint_center_functional(
    trajectory: &TrialRecording,
    moving_markers: &[MarkerId],
    proximal: &SegmentDefinition,
) -> Result<Vector3<f64>> {
    Ok(functional_center_fits(trajectory, moving_markers, proximal)?.0)
}

/// As [`estimate_joint_center_functional`], also returning the per-marker fits.
pub fn functional_center_fits(
    trajectory: &TrialRecording,
    moving_markers: &[MarkerId],
    proximal: &SegmentDefinition,
) -> Result<(Vector3<f64>, Vec<SphereFit>)> {
    if moving_markers.is_empty() {
        return Err(Error::DegenerateSphere("no moving markers given".into()));
    }
    let mut paths: Vec<Vec<Vector3<f64>>> = vec![Vec::new(); moving_markers.len()];
    for frame in &trajectory.frames {
        let (local, observed): (Vec<_>, Vec<_>) = proximal
            .local_coordinates
            .iter()
            .zip(proximal.observed(frame))
            .filter_map(|(l, o)| o.map(|o| (*l, o)))
            .unzip();
        if local.len() < 3 {
            continue;
        }
        let (pose, _) = fit_rigid_transform(&local, &observed)?;
        for (path, id) in paths.iter_mut().zip(moving_markers) {
            if let Some(p) = frame.get(id) {
                path.push(pose.inverse_transform_point(p));
            }
        }
    }

    let fits = paths
        .iter()
        .map(|path| fit_sphere(path))
        .collect::<Result<Vec<_>>>()?;
    let mut weighted = Vector3::zeros();
    let mut total = 0.0;
    for fit in &fits {
        let w = 1.0 / (fit.rms_residual * fit.rms_residual + CENTER_WEIGHT_FLOOR);
        weighted += fit.center * w;
        total += w;
    }
    Ok((weighted / total, fits))
}

/// Per-joint diagnostics of a calibration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub shoulder_sphere_rms_mm: Vec<f64>,
    pub wrist_sphere_rms_mm: Vec<f64>,
    /// Largest distance between a static marker and its model reconstruction.
    pub static_reconstruction_error_mm: f64,
}

/// Which rotation each constrained joint bounds, and the Euler sequence per joint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOptions {
    pub sequence: EulerSequence,
}

impl Default for CalibrationOptions {
    fn default() -> Self {
        CalibrationOptions {
            sequence: EulerSequence::ZXY,
        }
    }
}

/// Builds a calibrated model with the default marker set and options.
pub fn calibrate(
    static_frame: &MarkerFrame,
    shoulder_circumduction: &TrialRecording,
    wrist_circumduction: &TrialRecording,
) -> Result<KinematicModel> {
    calibrate_detailed(
        static_frame,
        shoulder_circumduction,
        wrist_circumduction,
        &MarkerSet::default(),
        &CalibrationOptions::default(),
    )
    .map(|(m, _)| m)
}

pub fn calibrate_detailed(
    static_frame: &MarkerFrame,
    shoulder_circumduction: &TrialRecording,
    wrist_circumduction: &TrialRecording,
    markers: &MarkerSet,
    options: &CalibrationOptions,
) -> Result<(KinematicModel, CalibrationReport)> {
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

    // Functional centres are found in technical frames equal to the global
    // frame at the static trial, so they come out in static global coordinates.
    let trunk_tech =
        SegmentDefinition::technical(Segment::Trunk, markers.cluster(Segment::Trunk), static_frame)?;
    let (shoulder, shoulder_fits) = functional_center_fits(
        shoulder_circumduction,
        &markers.cluster(Segment::Arm),
        &trunk_tech,
    )?;
    let forearm_tech = SegmentDefinition::technical(
        Segment::Forearm,
        markers.cluster(Segment::Forearm),
        static_frame,
    )?;
    let (wrist, wrist_fits) = functional_center_fits(
        wrist_circumduction,
        &markers.cluster(Segment::Hand),
        &forearm_tech,
    )?;
    let elbow = elbow_center(
        &static_frame.require(&markers.elbow_medial)?,
        &static_frame.require(&markers.elbow_lateral)?,
    );
    let centers = JointCenters {
        shoulder,
        elbow,
        wrist,
    };
    let frames = build_anatomical_frames(static_frame, &centers, markers)?;

    let segments: Vec<SegmentDefinition> = Segment::ALL
        .iter()
        .map(|&seg| {
            let pose = frames.segment(seg);
            let ids = markers.cluster(seg);
            let local_coordinates = ids
                .iter()
                .map(|id| static_frame.require(id).map(|p| pose.inverse_transform_point(&p)))
                .collect::<Result<Vec<_>>>()?;
            Ok(SegmentDefinition {
                segment: seg,
                frame_rule: FrameRule::for_segment(seg),
                markers: ids,
                local_coordinates,
            })
        })
        .collect::<Result<_>>()?;

    let seq = options.sequence;
    let global_centers = [centers.shoulder, centers.elbow, centers.wrist];
    let joints: Vec<JointDefinition> = JointName::ALL
        .iter()
        .zip(global_centers)
        .map(|(&jn, c)| {
            let constraint = match jn {
                JointName::Shoulder => JointConstraint::Unconstrained,
                // Abduction-adduction (about X) at the elbow, pronation-supination (about Y) at the wrist.
                JointName::Elbow => JointConstraint::cardanic_about(&seq, Axis::X)?,
                JointName::Wrist => JointConstraint::cardanic_about(&seq, Axis::Y)?,
            };
            Ok(JointDefinition {
                joint: jn,
                proximal: jn.proximal(),
                distal: jn.distal(),
                center_in_proximal: frames.segment(jn.proximal()).inverse_transform_point(&c),
                center_in_distal: frames.segment(jn.distal()).inverse_transform_point(&c),
                euler_sequence: seq,
                constraint,
            })
        })
        .collect::<Result<_>>()?;

    let static_posture = Segment::ALL.iter().map(|&s| frames.segment(s)).collect();
    let model = KinematicModel::new(markers.clone(), segments, joints, static_posture)?;

    let predicted = model.predict_markers(&model.static_coordinates());
    let static_reconstruction_error_mm = predicted
        .iter()
        .map(|(id, p)| (p - static_frame.require(id).expect("cluster marker")).norm())
        .fold(0.0, f64::max);

    Ok((
        model,
        CalibrationReport {
            shoulder_sphere_rms_mm: shoulder_fits.iter().map(|f| f.rms_residual).collect(),
            wrist_sphere_rms_mm: wrist_fits.iter().map(|f| f.rms_residual).collect(),
            static_reconstruction_error_mm,
        },
    ))
}
