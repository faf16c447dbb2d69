use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::recording::MarkerId;
use crate::error::Error;

/// Rigid body segments of the chain, proximal to distal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Segment {
    Trunk,
    Arm,
    Forearm,
    Hand,
}

impl Segment {
    pub const ALL: [Segment; 4] = [Segment::Trunk, Segment::Arm, Segment::Forearm, Segment::Hand];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Segment::Trunk => "trunk",
            Segment::Arm => "arm",
            Segment::Forearm => "forearm",
            Segment::Hand => "hand",
        }
    }
}

impl fmt::Display for Segment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Joints of the chain; joint `j` links segment `j` to segment `j + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JointName {
    Shoulder,
    Elbow,
    Wrist,
}

impl JointName {
    pub const ALL: [JointName; 3] = [JointName::Shoulder, JointName::Elbow, JointName::Wrist];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn proximal(self) -> Segment {
        Segment::ALL[self.index()]
    }

    pub fn distal(self) -> Segment {
        Segment::ALL[self.index() + 1]
    }

    pub fn name(self) -> &'static str {
        match self {
            JointName::Shoulder => "shoulder",
            JointName::Elbow => "elbow",
            JointName::Wrist => "wrist",
        }
    }
}

impl fmt::Display for JointName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for JointName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "shoulder" => Ok(JointName::Shoulder),
            "elbow" => Ok(JointName::Elbow),
            "wrist" => Ok(JointName::Wrist),
            _ => Err(Error::InvalidConfig(format!("unknown joint '{s}'"))),
        }
    }
}

/// Markers for the optional head frame.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadMarkers {
    pub chin: MarkerId,
    pub forehead: MarkerId,
    pub temple_left: MarkerId,
    pub temple_right: MarkerId,
}

/// Names of every marker in the protocol, by anatomical role.
///
/// Tracking clusters: trunk (C7, L3, sternum), arm (4, the first two
/// proximal), forearm (3, the first proximal), hand (3, the first near the
/// wrist). Epicondyle and styloid markers are static-trial only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MarkerSet {
    pub c7: MarkerId,
    pub l3: MarkerId,
    pub sternum: MarkerId,
    pub acromion: Option<MarkerId>,
    pub arm: [MarkerId; 4],
    pub elbow_medial: MarkerId,
    pub elbow_lateral: MarkerId,
    pub forearm: [MarkerId; 3],
    pub styloid_posterior: MarkerId,
    pub styloid_anterior: MarkerId,
    /// Near-wrist marker first, then posterior, then anterior.
    pub hand: [MarkerId; 3],
    pub head: Option<HeadMarkers>,
}

impl Default for MarkerSet {
    fn default() -> Self {
        let m = MarkerId::new;
        MarkerSet {
            c7: m("C7"),
            l3: m("L3"),
            sternum: m("STERNUM"),
            acromion: Some(m("ACROMION")),
            arm: [m("ARM_P1"), m("ARM_P2"), m("ARM_D1"), m("ARM_D2")],
            elbow_medial: m("ELBOW_MED"),
            elbow_lateral: m("ELBOW_LAT"),
            forearm: [m("FOREARM_P1"), m("FOREARM_D1"), m("FOREARM_D2")],
            styloid_posterior: m("STYLOID_POST"),
            styloid_anterior: m("STYLOID_ANT"),
            hand: [m("HAND_WRIST"), m("HAND_POST"), m("HAND_ANT")],
            head: None,
        }
    }
}

impl MarkerSet {
    /// Tracking cluster of a segment.
    pub fn cluster(&self, segment: Segment) -> Vec<MarkerId> {
        match segment {
            Segment::Trunk => vec![self.c7.clone(), self.l3.clone(), self.sternum.clone()],
            Segment::Arm => self.arm.to_vec(),
            Segment::Forearm => self.forearm.to_vec(),
            Segment::Hand => self.hand.to_vec(),
        }
    }

    pub fn hand_near_wrist(&self) -> &MarkerId {
        &self.hand[0]
    }

    pub fn hand_posterior(&self) -> &MarkerId {
        &self.hand[1]
    }

    pub fn hand_anterior(&self) -> &MarkerId {
        &self.hand[2]
    }

    /// Anatomical markers used only during the static trial.
    pub fn static_only(&self) -> Vec<MarkerId> {
        let mut v = vec![
            self.elbow_medial.clone(),
            self.elbow_lateral.clone(),
            self.styloid_posterior.clone(),
            self.styloid_anterior.clone(),
        ];
        v.extend(self.acromion.iter().cloned());
        if let Some(h) = &self.head {
            v.extend([
                h.chin.clone(),
                h.forehead.clone(),
                h.temple_left.clone(),
                h.temple_right.clone(),
            ]);
        }
        v
    }

    /// Markers a static trial must contain.
    pub fn required_static(&self) -> Vec<MarkerId> {
        let mut v: Vec<MarkerId> = Segment::ALL.iter().flat_map(|&s| self.cluster(s)).collect();
        v.extend([
            self.elbow_medial.clone(),
            self.elbow_lateral.clone(),
            self.styloid_posterior.clone(),
            self.styloid_anterior.clone(),
        ]);
        v
    }

    /// Every marker name in the set.
    pub fn all(&self) -> Vec<MarkerId> {
        let mut v: Vec<MarkerId> = Segment::ALL.iter().flat_map(|&s| self.cluster(s)).collect();
        v.extend(self.static_only());
        v
    }
}
