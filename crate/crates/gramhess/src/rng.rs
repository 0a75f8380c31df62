//! Small deterministic PRNG used for sampling-based checks.
//!
//! A caller-supplied seed makes every sampling operation reproducible;
//! no global state is involved.

use alloc::vec::Vec;

/// SplitMix64 generator. Passes BigCrush, one u64 of state, and good
/// enough for test-point and decay-check sampling.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)`.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Standard normal deviate (Box-Muller).
    pub fn next_normal(&mut self) -> f64 {
        let u1 = (1.0 - self.next_f64()).max(f64::MIN_POSITIVE);
        let u2 = self.next_f64();
        libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
    }

    /// Vector of `dim` standard normal deviates.
    pub fn normal_vec(&mut self, dim: usize) -> Vec<f64> {
        (0..dim).map(|_| self.next_normal()).collect()
    }

    /// Uniform sample from the solid ball of given radius around `center`.
    pub fn in_ball(&mut self, center: &[f64], radius: f64) -> Vec<f64> {
        let dim = center.len();
        let dir = self.normal_vec(dim);
        let norm = libm::sqrt(dir.iter().map(|v| v * v).sum::<f64>()).max(f64::MIN_POSITIVE);
        let r = radius * libm::pow(self.next_f64(), 1.0 / dim as f64);
        center
            .iter()
            .zip(dir.iter())
            .map(|(c, d)| c + r * d / norm)
            .collect()
    }
}
