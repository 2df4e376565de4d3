//! Deterministic, portable pseudo-random generation for the synthetic
//! generator and for randomized tests.
//!
//! Reproducibility across platforms and implementations matters more here
//! than statistical sophistication, so the generator is SplitMix64 — a
//! fully specified 64-bit mixer with published constants — and Gaussian
//! deviates come from the classic Box–Muller transform. The same seed
//! always produces the same byte-identical output stream.

use std::f64::consts::PI;

/// SplitMix64 (Steele, Lea & Flood 2014). State advances by the golden-ratio
/// increment; each output is a finalized mix of the new state.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
    /// Cached second deviate from the last Box–Muller pair.
    spare_gauss: Option<f64>,
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed, spare_gauss: None }
    }

    /// Derives an independent child generator. Streams for different `tag`
    /// values are decorrelated by running the tag through the output mixer
    /// before combining it with the parent seed.
    pub fn substream(&self, tag: u64) -> Self {
        let mut t = SplitMix64::new(tag.wrapping_mul(GOLDEN_GAMMA));
        SplitMix64::new(self.state.wrapping_add(t.next_u64()))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1), using the top 53 bits.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in [lo, hi).
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Uniform integer in [0, n).
    pub fn below(&mut self, n: usize) -> usize {
        // Rejection-free scaling is fine at these population sizes.
        (self.next_f64() * n as f64) as usize % n.max(1)
    }

    /// Standard normal deviate via Box–Muller; pairs are cached.
    pub fn next_gauss(&mut self) -> f64 {
        if let Some(g) = self.spare_gauss.take() {
            return g;
        }
        // u1 in (0, 1] so the log is finite.
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * PI * u2;
        self.spare_gauss = Some(r * theta.sin());
        r * theta.cos()
    }

    pub fn gauss(&mut self, mean: f64, std: f64) -> f64 {
        mean + std * self.next_gauss()
    }
}
