//! Counter-based random streams.
//!
//! Every random quantity in the crate is a pure function of a 64-bit seed and
//! a counter, so sampling is order-independent: cells of a grid can be drawn
//! in any order, on any number of threads, or regenerated one at a time, and
//! the values are bit-identical. A stream is addressed by `(seed, stream_id)`
//! and a cell within it by `(i, j)`; one-dimensional draws use `j = 0`.

/// SplitMix64 finalizer: a bijective mixer with full avalanche.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

/// 64 bits addressed by `(seed, stream, i, j)`. The inputs are folded in one
/// at a time through [`mix64`] so that nearby counters decorrelate fully.
#[inline]
pub fn cell_u64(seed: u64, stream: u64, i: u64, j: u64) -> u64 {
    let mut h = mix64(seed ^ 0x9e3779b97f4a7c15);
    h = mix64(h ^ stream.wrapping_mul(0xd1342543de82ef95).wrapping_add(0x2545f4914f6cdd1d));
    h = mix64(h ^ i.wrapping_mul(0xa24baed4963ee407).wrapping_add(0x71afc85e92dfb6dd));
    h = mix64(h ^ j.wrapping_mul(0x9fb21c651e98df25).wrapping_add(0x3c6ef372fe94f82b));
    h
}

/// Uniform draw in `[0, 1)` with 53-bit resolution.
#[inline]
pub fn cell_uniform(seed: u64, stream: u64, i: u64, j: u64) -> f64 {
    (cell_u64(seed, stream, i, j) >> 11) as f64 * (1.0 / 9007199254740992.0)
}

/// Exponential draw with the given rate via the inverse CDF `-ln(1-U)/rate`.
/// `U in [0,1)` keeps the logarithm finite; the result is strictly positive
/// except on the measure-zero event `U = 0`.
#[inline]
pub fn cell_exponential(seed: u64, stream: u64, i: u64, j: u64, rate: f64) -> f64 {
    debug_assert!(rate > 0.0);
    -(-cell_uniform(seed, stream, i, j)).ln_1p() / rate
}

/// Derives a child stream id, used to give replicas and named substreams
/// independent counters under one run seed.
#[inline]
pub fn substream(stream: u64, label: u64) -> u64 {
    mix64(stream ^ label.wrapping_mul(0xd6e8feb86659fd93).wrapping_add(0x9e3779b97f4a7c15))
}

/// Order-sensitive 64-bit digest of a word stream, used for reproducibility
/// audits of grids and rasters.
pub fn digest_words<I: IntoIterator<Item = u64>>(words: I) -> u64 {
    let mut h = 0x243f6a8885a308d3;
    for w in words {
        h = mix64(h ^ w);
    }
    h
}
