//! Seeded random streams and the seed-derivation scheme.
//!
//! Every run (one agent on one instance) owns its own [`RngStream`]. Child
//! seeds are derived from the master seed by [`derive_seed`], which mixes
//! the master seed, the instance index and a string label with SplitMix64
//! and FNV-1a. Because the label is part of the hash, adding or removing an
//! agent never shifts the stream of any other agent.

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// A deterministic random stream (ChaCha8 under the hood).
#[derive(Clone, Debug)]
pub struct RngStream(ChaCha8Rng);

impl RngStream {
    pub fn from_seed(seed: u64) -> Self {
        RngStream(ChaCha8Rng::seed_from_u64(seed))
    }

    /// Uniform draw in `[0, 1)`.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        self.0.random::<f64>()
    }

    #[inline]
    pub fn standard_normal(&mut self) -> f64 {
        self.0.sample(StandardNormal)
    }

    /// Gaussian draw with the given mean and variance. A zero variance
    /// returns the mean exactly.
    #[inline]
    pub fn gaussian(&mut self, mean: f64, variance: f64) -> f64 {
        if variance <= 0.0 {
            return mean;
        }
        mean + variance.sqrt() * self.standard_normal()
    }

    /// Uniform index in `0..n`. Panics if `n == 0`.
    #[inline]
    pub fn index(&mut self, n: usize) -> usize {
        self.0.random_range(0..n)
    }

    /// Uniform integer in the inclusive range `lo..=hi`.
    pub fn int_inclusive(&mut self, lo: usize, hi: usize) -> usize {
        self.0.random_range(lo..=hi)
    }

    /// Uniform real in `[lo, hi]`; returns `lo` when the range is a point.
    pub fn real_inclusive(&mut self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return lo;
        }
        self.0.random_range(lo..=hi)
    }

    /// Draws an index from a probability vector using a single uniform.
    /// Mass lost to rounding falls on the last positive entry.
    pub fn categorical(&mut self, probs: &[f64]) -> usize {
        let u = self.uniform();
        let mut acc = 0.0;
        let mut last = 0;
        for (i, &p) in probs.iter().enumerate() {
            if p > 0.0 {
                acc += p;
                last = i;
                if u < acc {
                    return i;
                }
            }
        }
        last
    }

    /// Gamma(shape, 1) draw, used for Dirichlet and Beta sampling.
    pub fn gamma(&mut self, shape: f64) -> f64 {
        let dist = rand_distr::Gamma::new(shape, 1.0).expect("gamma shape must be positive");
        self.0.sample(dist)
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// 64-bit FNV-1a hash of a label.
pub fn fnv1a(label: &str) -> u64 {
    let mut h: u64 = 0xCBF2_9CE4_8422_2325;
    for b in label.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01B3);
    }
    h
}

/// Child seed for `(master, instance, label)`:
/// `splitmix64(splitmix64(master) ^ splitmix64(instance + 1) ^ fnv1a(label))`.
pub fn derive_seed(master: u64, instance: u64, label: &str) -> u64 {
    splitmix64(splitmix64(master) ^ splitmix64(instance.wrapping_add(1)) ^ fnv1a(label))
}
