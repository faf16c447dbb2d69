//! Inputs shared by the benchmarks: the default synthetic subject and one
//! full-noise trial of each movement.

use limbgo_core::sim::{run_study_detailed, Movement, StudyConfig};
use limbgo_core::{KinematicModel, TrialRecording};

pub struct Workload {
    pub model: KinematicModel,
    pub trial: TrialRecording,
}

pub fn workload(movement: Movement) -> Workload {
    let mut config = StudyConfig::for_movement(movement);
    config.n_trials = 1;
    let mut run = run_study_detailed(&config).expect("default study runs");
    Workload {
        model: run.model,
        trial: run.trials.remove(0).input,
    }
}
