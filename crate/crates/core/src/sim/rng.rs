//! Splittable seed tree: every random draw comes from a stream addressed by
//! `(master seed, trial, purpose, marker, axis)`, so switching one noise
//! source on or off never shifts the draws of another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    MeasurementNoise = 1,
    ArtefactFrequency = 2,
    ArtefactPhase = 3,
    ArtefactDirection = 4,
}

/// Address of one stream below a master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey {
    pub trial: u64,
    pub purpose: Purpose,
    pub marker: u64,
    pub axis: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a path of labels into one 64-bit seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &x| splitmix64(acc ^ splitmix64(x)))
}

/// Per-trial seed, reported in study metadata.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    derive_seed(master, &[trial])
}

pub fn stream(master: u64, key: StreamKey) -> ChaCha8Rng {
    let seed = derive_seed(
        trial_seed(master, key.trial),
        &[key.purpose as u64, key.marker, key.axis],
    );
    ChaCha8Rng::seed_from_u64(seed)
}
