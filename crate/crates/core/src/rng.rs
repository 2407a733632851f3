//! Counter-based random streams.
//!
//! Every shot owns a ChaCha8 stream keyed by `(master seed, experiment id,
//! sweep index)` and selected by the shot index, so results do not depend on
//! the order in which shots are evaluated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable 64-bit id of an experiment name (FNV-1a).
pub fn experiment_id(name: &str) -> u64 {
    name.bytes().fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3))
}

/// 256-bit key for one sweep point.
pub fn stream_key(master_seed: u64, experiment: u64, sweep_index: u64) -> [u8; 32] {
    let mut state = splitmix64(master_seed);
    state = splitmix64(state ^ experiment);
    state = splitmix64(state ^ sweep_index);
    let mut key = [0u8; 32];
    for chunk in key.chunks_exact_mut(8) {
        state = splitmix64(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    key
}

/// Independent stream for one shot.
pub fn shot_rng(master_seed: u64, experiment: u64, sweep_index: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::from_seed(stream_key(master_seed, experiment, sweep_index));
    rng.set_stream(shot);
    rng
}

/// Stream for work that belongs to a sweep point as a whole (for example
/// drawing random gate sequences).
pub fn point_rng(master_seed: u64, experiment: u64, sweep_index: u64) -> ChaCha8Rng {
    shot_rng(master_seed, experiment, sweep_index, u64::MAX)
}
