//! Deterministic seed streams.
//!
//! Every random draw in the crate goes through a [`ChaCha8Rng`] seeded from a
//! `u64`. Independent sub-streams (per trial, per purpose) are derived by
//! mixing the parent seed with a tag through SplitMix64, so parallel trials
//! never share a stream and results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Builds the generator for a seed.
pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the child seed `tag` of `parent`.
pub fn child(parent: u64, tag: u64) -> u64 {
    splitmix64(splitmix64(parent) ^ tag.wrapping_mul(0xD605_BBB5_8C8A_BBFD))
}

/// Derives a child seed from a path of tags, e.g. `[trial, PURPOSE]`.
pub fn derive(parent: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(parent, |s, &t| child(s, t))
}
