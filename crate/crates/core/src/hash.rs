//! Stateless seeded randomness.
//!
//! Every randomized operator derives its random values as a pure hash of
//! (master seed, stream tag, stable element identity). This keeps results
//! reproducible and independent of partition count: no per-partition RNG
//! state exists anywhere in the engine.

/// Stream tags keep independent random decisions decorrelated even when they
/// hash the same identifiers.
pub(crate) const STREAM_KEEP: u64 = 0x4b454550; // element keep/flag decisions
pub(crate) const STREAM_JUMP_DRAW: u64 = 0x4a445257; // walk-or-jump draw
pub(crate) const STREAM_EDGE_PICK: u64 = 0x45504b; // untraversed-edge choice
pub(crate) const STREAM_JUMP_TARGET: u64 = 0x4a544754; // jump destination

/// splitmix64 finalizer; full-avalanche bijection on u64.
#[inline]
pub fn mix64(mut x: u64) -> u64 {
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Hashes a seed plus a short word sequence into a single u64.
#[inline]
pub fn hash_words(seed: u64, words: &[u64]) -> u64 {
    let mut h = mix64(seed ^ 0x5851_f42d_4c95_7f2d);
    for &w in words {
        h = mix64(h ^ mix64(w ^ 0x9e37_79b9_7f4a_7c15));
    }
    h
}

/// Maps a hash to the half-open unit interval [0, 1).
#[inline]
pub fn unit_half_open(h: u64) -> f64 {
    // Top 53 bits, the full mantissa width of an f64.
    (h >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
}

/// Maps a hash to the open-closed unit interval (0, 1].
///
/// Open at zero so that a keep threshold of exactly 0 retains nothing and a
/// threshold of exactly 1 retains everything.
#[inline]
pub fn unit_open_closed(h: u64) -> f64 {
    1.0 - unit_half_open(h)
}

/// Maps a hash to a uniform index in 0..n (Lemire's multiply-shift; avoids
/// modulo bias). `n` must be nonzero.
#[inline]
pub fn uniform_index(h: u64, n: usize) -> usize {
    debug_assert!(n > 0);
    ((h as u128 * n as u128) >> 64) as usize
}
