//! Seed derivation. Every random stream in an experiment is keyed by the
//! base seed and a tuple of tags, so streams never depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream tags.
pub const INSTANCE: u64 = 1;
pub const ORDER: u64 = 2;
pub const MECHANISM: u64 = 3;
pub const DEVIATION: u64 = 4;

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

pub fn derive_seed(base: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(splitmix(base), |acc, &t| splitmix(acc ^ splitmix(t)))
}

pub fn rng_for(base: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(base, tags))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tags_separate_streams() {
        assert_ne!(derive_seed(1, &[ORDER, 0]), derive_seed(1, &[ORDER, 1]));
        assert_ne!(derive_seed(1, &[ORDER, 0]), derive_seed(1, &[MECHANISM, 0]));
        assert_ne!(derive_seed(1, &[2, 1]), derive_seed(1, &[1, 2]));
        assert_eq!(derive_seed(7, &[DEVIATION, 3, 4]), derive_seed(7, &[DEVIATION, 3, 4]));
    }
}
