//! Per-replicate random number streams.
//!
//! Every replicate owns a generator seeded from `hash(master_seed, index)`,
//! so results never depend on the order in which replicates are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ReplicateRng = ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Generator for replicate `index` under `master_seed`.
pub fn replicate_rng(master_seed: u64, index: u64) -> ReplicateRng {
    let mut seed = [0u8; 32];
    let mut state = mix(master_seed) ^ mix(index.wrapping_add(0x5851_f42d_4c95_7f2d));
    for chunk in seed.chunks_mut(8) {
        state = mix(state);
        chunk.copy_from_slice(&state.to_le_bytes());
    }
    ChaCha8Rng::from_seed(seed)
}
