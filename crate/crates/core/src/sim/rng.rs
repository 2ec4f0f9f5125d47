use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// MurmurHash3 64-bit finalizer. Maps 0 to 0, so path 0 keeps the base seed.
pub fn fmix64(mut k: u64) -> u64 {
    k ^= k >> 33;
    k = k.wrapping_mul(0xff51_afd7_ed55_8ccd);
    k ^= k >> 33;
    k = k.wrapping_mul(0xc4ce_b9fe_1a85_ec53);
    k ^= k >> 33;
    k
}

/// Seed for the `index`-th path (paths ordered by id).
pub fn path_seed(seed: u64, index: usize) -> u64 {
    seed ^ fmix64(index as u64)
}

/// ChaCha8 stream seeded through `seed_from_u64`; the same seed gives the
/// same draws on every platform.
pub(crate) struct SimRng(ChaCha8Rng);

impl SimRng {
    pub fn new(seed: u64) -> Self {
        SimRng(ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn bit(&mut self) -> u8 {
        (self.0.next_u64() >> 63) as u8
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `0..n` (multiply-shift; bias below 2^-60 for small n).
    pub fn index(&mut self, n: usize) -> usize {
        ((self.0.next_u64() as u128 * n as u128) >> 64) as usize
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.unit() < p
    }
}
