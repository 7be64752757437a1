//! Seed derivation and the few random primitives the constructions need.
//!
//! Every random choice in the crate flows from a single `u64` seed. Child
//! streams (one per partition scale, one per trial, ...) are derived with
//! [`derive_seed`], which mixes the parent seed with a stream index through
//! the SplitMix64 finalizer, so results never depend on evaluation order.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Domain tags keep the per-scale, per-trial and per-instance streams apart.
pub mod stream {
    pub const SCALE: u64 = 0x5343_414c_4500_0000;
    pub const TRIAL: u64 = 0x5452_4941_4c00_0000;
    pub const LEVEL: u64 = 0x4c45_5645_4c00_0000;
    pub const INSTANCE: u64 = 0x494e_5354_0000_0000;
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// `mix64(seed ^ mix64(tag ^ index))`: the seed for child stream `index`.
pub fn derive_seed(seed: u64, tag: u64, index: u64) -> u64 {
    mix64(seed ^ mix64(tag ^ index))
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform on `[lo, hi]` from a 53-bit mantissa draw.
pub fn uniform_real<R: RngCore>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
    lo + (hi - lo) * u
}

/// Fisher-Yates shuffle, front to back.
pub fn shuffle<T, R: RngCore>(rng: &mut R, items: &mut [T]) {
    let n = items.len();
    for i in 0..n.saturating_sub(1) {
        let j = rng.random_range(i..n);
        items.swap(i, j);
    }
}
