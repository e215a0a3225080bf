//! Counter-based random streams derived from one master seed.
//!
//! Every (grid point, trial, environment, purpose) tuple maps to its own
//! ChaCha8 stream, so results do not depend on the order in which trials are
//! scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// What a stream is used for; keeps streams of one trial independent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Model = 1,
    Design = 2,
    Noise = 3,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes a master seed with a path of counters into a 64-bit child seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(master), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn stream(master: u64, path: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, path))
}

/// Stream for one trial of one grid point.
pub fn trial_stream(master: u64, grid_index: usize, trial: usize, env: usize, purpose: Purpose) -> ChaCha8Rng {
    stream(
        master,
        &[grid_index as u64, trial as u64, env as u64, purpose as u64],
    )
}
