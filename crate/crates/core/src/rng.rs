//! Pinned pseudo-random stream used for every seeded artifact.
//!
//! The generator is SplitMix64. Given a 64-bit state `s`, one draw is
//!
//! ```text
//! s = s + 0x9E3779B97F4A7C15            (wrapping)
//! z = s
//! z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9   (wrapping)
//! z = (z ^ (z >> 27)) * 0x94D049BB133111EB   (wrapping)
//! return z ^ (z >> 31)
//! ```
//!
//! Derived quantities:
//!
//! * `next_f64 = (next_u64 >> 11) * 2^-53`, uniform on `[0, 1)`.
//! * `uniform(lo, hi) = lo + (hi - lo) * next_f64`.
//! * `below(n) = (next_u64 as u128 * n as u128) >> 64` (multiply-high, no rejection).
//! * `derive_seed(seed, stream) = mix(seed + GOLDEN * (stream + 1))` where `mix` is the
//!   output function above applied to its argument without the state increment.
//!
//! Independent streams (per sequence, per axis, per epoch) are always obtained with
//! [`derive_seed`], so any language can regenerate identical datasets.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the child stream `stream` of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    mix(seed.wrapping_add(GOLDEN.wrapping_mul(stream.wrapping_add(1))))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix(self.state)
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Integer in `[0, n)`; `n` must be nonzero.
    pub fn below(&mut self, n: u64) -> u64 {
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    pub fn split(&self, stream: u64) -> Self {
        Self::new(derive_seed(self.state, stream))
    }
}
