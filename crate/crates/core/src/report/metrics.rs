use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{wrap_angle, Axis, EulerSequence};
use crate::model::{JointName, KinematicModel};
use crate::solver::{SolveMode, TrialSolution};

/// Root mean square of a series.
pub fn rms(series: &[f64]) -> Result<f64> {
    if series.is_empty() {
        return Err(Error::EmptySeries);
    }
    Ok((series.iter().map(|x| x * x).sum::<f64>() / series.len() as f64).sqrt())
}

/// Mean and sample (n − 1) standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub n: usize,
    pub mean: f64,
    /// Absent for a single value.
    pub sd: Option<f64>,
}

pub fn aggregate(values: &[f64]) -> Result<Aggregate> {
    if values.is_empty() {
        return Err(Error::EmptySeries);
    }
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let sd = (n > 1).then(|| {
        (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64).sqrt()
    });
    Ok(Aggregate { n, mean, sd })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DofKind {
    /// Rotation about a joint axis (ISB naming by axis).
    FlexionExtension,
    AbductionAdduction,
    /// Axial rotation: internal-external at the shoulder, pronation-supination distally.
    AxialRotation,
    Dislocation,
}

/// One reported degree of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct DofLabel {
    pub joint: JointName,
    pub kind: DofKind,
}

impl DofLabel {
    /// Every joint's three angles, then every joint's dislocation.
    pub fn all() -> Vec<DofLabel> {
        let mut v = Vec::with_capacity(12);
        for joint in JointName::ALL {
            for kind in [DofKind::FlexionExtension, DofKind::AbductionAdduction, DofKind::AxialRotation] {
                v.push(DofLabel { joint, kind });
            }
        }
        for joint in JointName::ALL {
            v.push(DofLabel {
                joint,
                kind: DofKind::Dislocation,
            });
        }
        v
    }

    pub fn is_angle(&self) -> bool {
        self.kind != DofKind::Dislocation
    }

    pub fn axis(&self) -> Option<Axis> {
        match self.kind {
            DofKind::FlexionExtension => Some(Axis::Z),
            DofKind::AbductionAdduction => Some(Axis::X),
            DofKind::AxialRotation => Some(Axis::Y),
            DofKind::Dislocation => None,
        }
    }

    /// Position of this angle in `sequence`.
    pub fn angle_index(&self, sequence: &EulerSequence) -> Option<usize> {
        self.axis().and_then(|a| sequence.position_of(a))
    }

    fn kind_name(&self) -> &'static str {
        match (self.kind, self.joint) {
            (DofKind::FlexionExtension, _) => "flexion_extension",
            (DofKind::AbductionAdduction, _) => "abduction_adduction",
            (DofKind::AxialRotation, JointName::Shoulder) => "internal_external_rotation",
            (DofKind::AxialRotation, _) => "pronation_supination",
            (DofKind::Dislocation, _) => "dislocation",
        }
    }
}

impl fmt::Display for DofLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.joint, self.kind_name())
    }
}

impl FromStr for DofLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        DofLabel::all()
            .into_iter()
            .find(|d| d.to_string() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown DOF label '{s}'")))
    }
}

impl TryFrom<String> for DofLabel {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DofLabel> for String {
    fn from(d: DofLabel) -> String {
        d.to_string()
    }
}

/// Per-frame errors of one DOF in one mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DofErrorSeries {
    pub dof: DofLabel,
    pub mode: SolveMode,
    /// rad for angles (wrapped difference), mm for dislocations.
    pub errors: Vec<f64>,
}

/// Error series of every DOF against true angles (dislocation truth is 0).
///
/// Requires a complete solution (one estimate per truth frame).
pub fn error_series(
    model: &KinematicModel,
    solution: &TrialSolution,
    truth_angles: &[[[f64; 3]; 3]],
) -> Result<Vec<DofErrorSeries>> {
    if solution.frames.len() != truth_angles.len() || !solution.is_complete() {
        return Err(Error::InvalidRecording(format!(
            "solution has {} of {} frames",
            solution.frames.len(),
            truth_angles.len()
        )));
    }
    DofLabel::all()
        .into_iter()
        .map(|dof| {
            let j = dof.joint.index();
            let errors = match dof.angle_index(&model.joint(dof.joint).euler_sequence) {
                Some(k) => solution
                    .frames
                    .iter()
                    .zip(truth_angles)
                    .map(|(f, t)| wrap_angle(f.angles[j][k] - t[j][k]))
                    .collect(),
                None if dof.is_angle() => {
                    return Err(Error::InvalidConfig(format!("{dof}: axis missing from joint sequence")))
                }
                None => solution.frames.iter().map(|f| f.dislocations[j]).collect(),
            };
            Ok(DofErrorSeries {
                dof,
                mode: solution.mode,
                errors,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rms_examples() {
        assert_eq!(rms(&[0.0; 5]).unwrap(), 0.0);
        assert_eq!(rms(&[-2.5; 4]).unwrap(), 2.5);
        assert!((rms(&[3.0, 4.0]).unwrap() - 12.5f64.sqrt()).abs() < 1e-15);
        assert!(matches!(rms(&[]), Err(Error::EmptySeries)));
    }

    #[test]
    fn aggregate_examples() {
        let a = aggregate(&[2.0, 2.0, 2.0]).unwrap();
        assert_eq!((a.mean, a.sd), (2.0, Some(0.0)));
        let b = aggregate(&[1.0, 3.0]).unwrap();
        assert_eq!(b.mean, 2.0);
        assert!((b.sd.unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let c = aggregate(&[0.7]).unwrap();
        assert_eq!((c.mean, c.sd), (0.7, None));
    }

    #[test]
    fn labels_round_trip() {
        for d in DofLabel::all() {
            assert_eq!(d.to_string().parse::<DofLabel>().unwrap(), d);
        }
        assert_eq!(DofLabel::all().len(), 12);
        assert_eq!(
            DofLabel { joint: JointName::Elbow, kind: DofKind::AbductionAdduction }.to_string(),
            "elbow.abduction_adduction"
        );
    }

    proptest! {
        #[test]
        fn rms_ignores_order_and_sign(
            xs in prop::collection::vec(-1e3..1e3f64, 1..50),
            flips in prop::collection::vec(any::<bool>(), 50),
            seed in any::<u64>(),
        ) {
            let base = rms(&xs).unwrap();
            let mut ys: Vec<f64> = xs.iter().zip(&flips).map(|(x, f)| if *f { -x } else { *x }).collect();
            let n = ys.len();
            for i in 0..n {
                let j = (seed.wrapping_mul(i as u64 + 1) % n as u64) as usize;
                ys.swap(i, j);
            }
            prop_assert!((rms(&ys).unwrap() - base).abs() <= 1e-12 * (1.0 + base));
        }
    }
}
