//! Synthetic subject, simulated movements, noise models and the study driver.

mod movement;
mod noise;
mod rng;
mod study;
mod subject;

pub use movement::{
    generate_ground_truth, GroundTruth, Movement, MovementProfile, AMPLITUDE, DURATION_S, FREQUENCY_HZ,
    SAMPLE_RATE_HZ,
};
pub use noise::{
    add_measurement_noise, add_skin_artefacts, draw_artefacts, ArtefactDirection, ArtefactParams,
    DrawnArtefact, MeasurementNoiseParams, RngStreams, MEASUREMENT_SIGMA_MM, OMEGA_RANGE,
    SCHEDULE_FREQUENCY_HZ,
};
pub use rng::{derive_seed, stream, trial_seed, Purpose, StreamKey};
pub use study::{
    calibrate_subject, run_study, run_study_detailed, simulate_input, ArtefactConfig, NoiseConfig, OutputConfig, StudyConfig,
    StudyRun, TrialRun,
};
pub use subject::{make_synthetic_subject, Anthropometry, SyntheticSubject, CIRCUMDUCTION_FRAMES, SAMPLE_RATE};
