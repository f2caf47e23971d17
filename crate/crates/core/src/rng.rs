//! Seed derivation for reproducible parallel streams.
//!
//! Every parallel unit of work (a block of Monte Carlo draws, a replicate)
//! gets its own ChaCha stream keyed by the run seed and the unit's index, so
//! results do not depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// ChaCha8 generator on stream `stream` of key `seed`.
pub fn substream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Child seed for `(index, purpose)` under `seed`.
pub fn derive_seed(seed: u64, index: u64, purpose: u64) -> u64 {
    mix(mix(seed ^ mix(index)) ^ purpose.wrapping_mul(0xd6e8_feb8_6659_fd93))
}
