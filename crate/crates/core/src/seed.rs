//! Counter-based seed derivation.
//!
//! Every random stream in the crate is keyed by `(root seed, stream name, index)`
//! so results never depend on iteration order or worker count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn hash_str(s: &str) -> u64 {
    // FNV-1a, then mixed
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    mix64(h)
}

/// Derives the seed of a named sub-stream.
pub fn derive(seed: u64, stream: &str) -> u64 {
    mix64(seed ^ hash_str(stream))
}

/// Derives the seed of item `index` of a named sub-stream.
pub fn derive_indexed(seed: u64, stream: &str, index: u64) -> u64 {
    mix64(derive(seed, stream) ^ mix64(index.wrapping_add(0xA5A5_5A5A)))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream_rng(seed: u64, stream: &str) -> ChaCha8Rng {
    rng(derive(seed, stream))
}
