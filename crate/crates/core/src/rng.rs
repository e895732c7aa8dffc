//! Deterministic generator construction.
//!
//! Every random draw in the crate goes through [`seeded_rng`], and every
//! sub-stream seed is derived from a parent seed plus a list of integer tags,
//! so results never depend on scheduling order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix `tags` into `parent`, one splitmix round per tag.
pub fn derive_seed(parent: u64, tags: &[u64]) -> u64 {
    tags.iter()
        .fold(splitmix64(parent), |acc, &t| splitmix64(acc ^ splitmix64(t)))
}

/// Stream tags used when deriving per-job seeds.
pub mod stream {
    pub const THETA: u64 = 1;
    pub const CALIBRATION: u64 = 2;
    pub const TRAIN: u64 = 3;
    pub const TEST: u64 = 4;
    pub const PROBE: u64 = 5;
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng as _;

    #[test]
    fn same_seed_same_stream() {
        let a: Vec<u64> = seeded_rng(9).random_iter().take(4).collect();
        let b: Vec<u64> = seeded_rng(9).random_iter().take(4).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn derived_seeds_differ_by_tag_order() {
        let s1 = derive_seed(1, &[256, 0, stream::THETA]);
        let s2 = derive_seed(1, &[256, 0, stream::TRAIN]);
        let s3 = derive_seed(1, &[0, 256, stream::THETA]);
        assert_ne!(s1, s2);
        assert_ne!(s1, s3);
        assert_eq!(s1, derive_seed(1, &[256, 0, stream::THETA]));
    }
}
