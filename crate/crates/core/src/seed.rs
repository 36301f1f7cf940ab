//! Deterministic seed derivation for parallel simulation streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Mixes a master seed with a stream index (SplitMix64 finalizer), so
/// per-run seeds are stable regardless of scheduling order.
pub fn derive(master: u64, stream: u64) -> u64 {
    let mut z = master ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A ChaCha8 generator for one derived stream.
pub fn rng_for(master: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(master, stream))
}
