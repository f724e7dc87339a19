//! Counter-based draws keyed by `(seed, stream, counter)`.
//!
//! Random arithmetic functions are defined prime by prime, so a value must be
//! reproducible from its key alone without storing per-prime state.

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[inline]
pub fn hash3(seed: u64, stream: u64, counter: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ stream) ^ counter)
}

/// Uniform in `[0, 1)` with 53 random bits.
#[inline]
pub fn unit_uniform(seed: u64, stream: u64, counter: u64) -> f64 {
    (hash3(seed, stream, counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}
