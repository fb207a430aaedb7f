//! Reproducible random streams.
//!
//! Each independent unit of work (a shard of pairs, a spectrum point) gets its
//! own ChaCha8 stream, keyed by a 64-bit seed and a stream index, so results do
//! not depend on how work is scheduled across threads.

use rand_chacha::ChaCha8Rng;
use rand_core::{Rng, SeedableRng};

pub struct SimRng {
    inner: ChaCha8Rng,
}

impl SimRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on [0, 1) with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Exponential with mean `scale`.
    #[inline]
    pub fn exponential(&mut self, scale: f64) -> f64 {
        -scale * (1.0 - self.uniform()).ln()
    }

    #[inline]
    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }
}

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent child seed from a parent seed and a key.
pub fn derive_seed(seed: u64, key: u64) -> u64 {
    mix64(seed.wrapping_add(0x9E37_79B9_7F4A_7C15).wrapping_add(mix64(key)))
}
