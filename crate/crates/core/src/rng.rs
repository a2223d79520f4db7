//! Counter-based random streams.
//!
//! Every random quantity in the crate is drawn from [`Stream`], a SplitMix64
//! generator: the `k`-th output (k = 1, 2, ...) of a stream with seed `s` is
//!
//! ```text
//! mix64(s + k * 0x9E3779B97F4A7C15)        (wrapping arithmetic)
//! mix64(z) = z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//!            z ^= z >> 27; z *= 0x94D049BB133111EB;
//!            z ^ (z >> 31)
//! ```
//!
//! so a stream is a pure function of its seed and position. Independent
//! streams for ensemble members come from [`derive_seed`]:
//! `derive_seed(master, i) = mix64(master ^ mix64(i + 0x9E3779B97F4A7C15))`.
//! Uniform doubles take the top 53 bits: `(x >> 11) * 2^-53`. Normal deviates
//! use Box-Muller and always consume both values of a pair.

use core::f64::consts::TAU;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the `index`-th child stream of `master`.
#[inline]
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix64(master ^ mix64(index.wrapping_add(GOLDEN_GAMMA)))
}

#[derive(Debug, Clone)]
pub struct Stream {
    state: u64,
    spare_normal: Option<f64>,
}

impl Stream {
    pub fn new(seed: u64) -> Self {
        Stream { state: seed, spare_normal: None }
    }

    /// Child stream `index` of this stream's seed, independent of the
    /// current position.
    pub fn child(seed: u64, index: u64) -> Self {
        Stream::new(derive_seed(seed, index))
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix64(self.state)
    }

    /// Uniform on [0, 1).
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on [lo, hi).
    #[inline]
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Standard normal deviate by Box-Muller.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare_normal.take() {
            return z;
        }
        // 1 - u keeps the logarithm finite
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (TAU * u2).sin_cos();
        self.spare_normal = Some(radius * s);
        radius * c
    }

    /// Index drawn from the categorical distribution `weights` (summing to 1).
    pub fn categorical(&mut self, weights: &[f64]) -> usize {
        let u = self.uniform();
        let mut acc = 0.0;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            if u < acc {
                return i;
            }
        }
        weights.len() - 1
    }
}
