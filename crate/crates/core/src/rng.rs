//! Reproducible random draws.
//!
//! Every random quantity in this crate comes from ChaCha8 (`rand_chacha` 0.3)
//! keyed with the caller's 64-bit seed written little-endian into the first
//! eight bytes of a zeroed 32-byte key. Independent sequences use distinct
//! ChaCha stream ids. A value below `bound` is drawn from one `u32` word as
//! `(word * bound) >> 32`. Nothing here depends on `rand`'s distribution code,
//! so outputs are stable across platforms and other implementations.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Stream id reserved for per-variable arity draws in synthetic data.
pub(crate) const ARITY_STREAM: u64 = u64::MAX;
/// Stream id reserved for random query generation.
pub(crate) const QUERY_STREAM: u64 = u64::MAX - 1;

pub(crate) fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(stream);
    rng
}

#[inline]
pub(crate) fn below(rng: &mut ChaCha8Rng, bound: u32) -> u32 {
    debug_assert!(bound > 0);
    ((rng.next_u32() as u64 * bound as u64) >> 32) as u32
}

/// `k` distinct values from `0..n`, in draw order (partial Fisher-Yates).
pub(crate) fn sample_distinct(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    assert!(k <= n);
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + below(rng, (n - i) as u32) as usize;
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}
