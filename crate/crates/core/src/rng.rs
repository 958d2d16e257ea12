//! Deterministic random streams.
//!
//! Every replication draws from `stream(seed, index)`: a ChaCha8 generator
//! keyed by `seed_from_u64(seed)` with its 64-bit stream id set to `index`.
//! Streams never overlap, so results do not depend on worker count or on the
//! order in which replications are scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// Stream id reserved for auxiliary draws (anchor placement, probes).
pub const AUX_STREAM: u64 = u64::MAX;

pub fn stream(seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A child seed for a named sub-experiment, so that nested loops get
/// disjoint stream families.
pub fn derive_seed(seed: u64, label: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed ^ label.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
