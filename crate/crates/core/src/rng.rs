//! Seed derivation and the uniform stream every stochastic component draws from.
//!
//! All randomness is ChaCha8 keyed by a 64-bit seed. Floats are built from the
//! top 53 bits of each `u64` so the mapping from seed to values depends only on
//! the ChaCha keystream, not on any sampling algorithm in `rand`.
//!
//! Seed mixing is SplitMix64's finalizer applied to a running state:
//!
//! ```text
//! state = seed
//! for each tag t: state = mix64(state ^ mix64(t + 0x9E3779B97F4A7C15))
//! ```
//!
//! where `mix64(z)` is `z ^= z >> 30; z *= 0xBF58476D1CE4E5B9; z ^= z >> 27;
//! z *= 0x94D049BB133111EB; z ^= z >> 31`. This mixer is part of the output
//! contract: changing it changes every sweep result.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives a child seed from `seed` and a sequence of tags.
pub fn derive_seed(seed: u64, tags: &[u64]) -> u64 {
    tags.iter().fold(seed, |state, &t| {
        mix64(state ^ mix64(t.wrapping_add(GOLDEN)))
    })
}

/// Stream tags so that independent consumers of one seed never share draws.
pub(crate) mod stream {
    pub const NOISE: u64 = 1;
    pub const INITIAL: u64 = 2;
    pub const REFRESH: u64 = 3;
    pub const MISMATCH: u64 = 4;
}

pub struct Stream {
    rng: ChaCha8Rng,
}

impl Stream {
    pub fn new(seed: u64, tag: u64) -> Self {
        Stream {
            rng: ChaCha8Rng::seed_from_u64(derive_seed(seed, &[tag])),
        }
    }

    /// Uniform on [0, 1) with 53-bit resolution.
    #[inline]
    pub fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on [-a, a].
    #[inline]
    pub fn symmetric(&mut self, a: f64) -> f64 {
        a * (2.0 * self.unit() - 1.0)
    }

    #[inline]
    pub fn bit(&mut self) -> bool {
        self.rng.next_u64() >> 63 == 1
    }
}
