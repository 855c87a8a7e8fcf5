//! Counter-based seed derivation.
//!
//! Every random draw in a run comes from a ChaCha stream keyed by the root seed
//! plus a purpose tag and coordinates, so quality draws for `(round, worker, task)`
//! are the same whichever policy is being simulated.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub(crate) const TAG_QUALITY: u64 = 0x5155_414c;
pub(crate) const TAG_POLICY: u64 = 0x504f_4c49;
pub(crate) const TAG_SCENARIO: u64 = 0x5343_454e;

#[inline]
fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Mixes a root seed with a tag and coordinates into a new 64-bit seed.
pub fn derive_seed(root: u64, tag: u64, coords: &[u64]) -> u64 {
    let mut h = splitmix(root ^ splitmix(tag));
    for &c in coords {
        h = splitmix(h ^ c);
    }
    h
}

pub fn stream(root: u64, tag: u64, coords: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, tag, coords))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream(7, TAG_QUALITY, &[1, 2, 3]).random();
        let b: u64 = stream(7, TAG_QUALITY, &[1, 2, 3]).random();
        let c: u64 = stream(7, TAG_QUALITY, &[1, 3, 2]).random();
        let d: u64 = stream(7, TAG_POLICY, &[1, 2, 3]).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }
}
