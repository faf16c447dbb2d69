//! Marker data, anatomical frames, the calibrated kinematic chain and its calibration.

mod calibrate;
mod frames;
mod kinematics;
mod markers;
mod recording;

pub use calibrate::{
    calibrate, calibrate_detailed, elbow_center, estimate_joint_center_functional,
    functional_center_fits, CalibrationOptions, CalibrationReport, CENTER_WEIGHT_FLOOR,
};
pub use frames::{build_anatomical_frames, AnatomicalFrames, FrameRule, JointCenters, FRAME_DEGENERACY};
pub use kinematics::{
    dislocation, joint_angles, predict_markers, ChainState, JointDefinition, KinematicModel,
    SegmentDefinition, Units, MODEL_FORMAT, MODEL_VERSION,
};
pub use markers::{HeadMarkers, JointName, MarkerSet, Segment};
pub use recording::{MarkerFrame, MarkerId, TrialRecording};
