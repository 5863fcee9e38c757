//! Counter-based seed mixing.
//!
//! Every random quantity in the crate is derived from a master seed through
//! these functions, so results do not depend on thread scheduling.

/// One round of the SplitMix64 output function.
#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Hash a seed together with a sequence of words.
#[inline]
pub fn mix(seed: u64, words: &[u64]) -> u64 {
    let mut h = splitmix64(seed);
    for &w in words {
        h = splitmix64(h ^ w);
    }
    h
}

/// Seed of the `index`-th independent trial of an experiment.
#[inline]
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix(master, &[0x7472_6961_6c00_0000, index])
}

/// Map a 64-bit hash to a uniform variate in `(0, 1]`.
#[inline]
pub fn unit_open_closed(h: u64) -> f64 {
    // 53 high bits, shifted by one so zero is never produced.
    ((h >> 11) as f64 + 1.0) * (1.0 / (1u64 << 53) as f64)
}

/// Map a 64-bit hash to a uniform variate in `[0, 1)`.
#[inline]
pub fn unit_closed_open(h: u64) -> f64 {
    (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
