//! Segmental and global (chain-wide, constrained) pose estimation.

mod constraint;
mod coords;
mod go;
mod segmental;
mod trial;
mod weights;

pub use constraint::{JointConstraint, LAXITY_ANGLE, MAX_DISLOCATION};
pub use coords::{project, CoordVector, GeneralizedCoordinates, JointCoordinates, DOF};
pub use go::{
    go_cost, go_solve, go_solve_with, trunk_fixed_mask, FixedMask, SolveDiagnostics, SolverOptions,
    TrunkHandling, WeightUpdate, FREE,
};
pub use segmental::{segmental_fit, SegmentalFit};
pub use trial::{solve_trial, solve_trial_with, FrameEstimate, FrameFailure, SolveMode, TrialSolution};
pub use weights::{compute_weights, raw_weights, WeightingScheme, WEIGHT_FLOOR};
