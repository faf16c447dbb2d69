//! Upper-limb bone pose estimation from skin markers: segmental (per-cluster)
//! registration and global optimisation over a constrained trunk, arm,
//! forearm and hand chain, with a simulation study of both.

pub mod error;
pub mod geom;
pub mod io;
pub mod model;
pub mod report;
pub mod sim;
pub mod solver;

pub use error::{Error, Result};
pub use geom::{EulerSequence, Pose, Rotation};
pub use model::{calibrate, KinematicModel, MarkerFrame, MarkerId, TrialRecording};
pub use report::StudyReport;
pub use sim::{run_study, StudyConfig};
pub use solver::{go_solve, segmental_fit, solve_trial, GeneralizedCoordinates, SolveMode};
