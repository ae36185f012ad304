//! Counter-based seed splitting.
//!
//! Every random stream in the crate is derived from a root seed and a
//! `(stream, index)` pair, so sub-computations can be generated in any order
//! (and on any number of threads) and still reproduce bit-for-bit.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive a child seed from `seed` for the given stream label and counter.
pub fn split(seed: u64, stream: u64, index: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ stream.rotate_left(17)) ^ index)
}

/// Generator for one `(stream, index)` slot of a root seed.
pub fn stream_rng(seed: u64, stream: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(split(seed, stream, index))
}

/// Stream labels used inside the crate.
pub mod streams {
    pub const HAAR: u64 = 1;
    pub const LOCAL_BALL: u64 = 2;
    pub const INIT: u64 = 3;
    pub const TRIAL_SELECTION: u64 = 4;
    pub const CC_DISTANCE: u64 = 5;
    pub const BALL_VOLUME: u64 = 6;
    pub const BOOTSTRAP: u64 = 7;
    pub const PROPERTY: u64 = 8;
}
