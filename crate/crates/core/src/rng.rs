//! Seeded random number generation.
//!
//! Every random quantity in the crate is drawn from a [`ChaCha8Rng`]. A run
//! with master seed `s` gives trial `i` its own generator seeded with
//! `mix(s, i)`, so trials are independent of scheduling and reproducible
//! bit-for-bit within this implementation.

use rand::SeedableRng;
pub use rand_chacha::ChaCha8Rng as SimRng;

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

pub fn mix(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x632B_E59B_D9B4_E019)))
}

pub fn from_seed(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}

/// Generator for trial `index` of a run with the given master seed.
pub fn substream(master: u64, index: u64) -> SimRng {
    SimRng::seed_from_u64(mix(master, index))
}
