use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{fit_rigid_transform, Pose};
use crate::model::{KinematicModel, MarkerFrame, Segment};

/// Independent per-segment registrations of one frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentalFit {
    /// Trunk, arm, forearm, hand.
    pub poses: [Pose; 4],
    /// RMS registration residual of each fit (mm).
    pub residuals: [f64; 4],
}

/// Fits every segment's calibrated local coordinates to its observed cluster.
/// Absent markers are skipped; fewer than three present is an error.
pub fn segmental_fit(model: &KinematicModel, frame: &MarkerFrame) -> Result<SegmentalFit> {
    let mut poses = [Pose::identity(); 4];
    let mut residuals = [0.0; 4];
    for seg in Segment::ALL {
        let def = model.segment(seg);
        let (local, observed): (Vec<Vector3<f64>>, Vec<Vector3<f64>>) = def
            .local_coordinates
            .iter()
            .zip(def.observed(frame))
            .filter_map(|(l, o)| o.map(|o| (*l, o)))
            .unzip();
        if local.len() < 3 {
            return Err(Error::DegenerateCluster(format!(
                "{seg} cluster has {} of {} markers present at t = {}",
                local.len(),
                def.markers.len(),
                frame.time
            )));
        }
        let (pose, rms) = fit_rigid_transform(&local, &observed)?;
        poses[seg.index()] = pose;
        residuals[seg.index()] = rms;
    }
    Ok(SegmentalFit { poses, residuals })
}
