//! Seeded log-uniform sampling of boxes in the positive orthant.
//!
//! Points come from a ChaCha8 stream seeded with `seed_from_u64`, three
//! draws per triple (two per pair) in order, so the first `n` points of a
//! longer run are exactly the points of a run of length `n`. Each draw `u`
//! becomes `t = (u >> 11) 2^-53` in `[0, 1)` and then
//! `lo * (hi / lo)^t`.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Description of the generator, echoed in reports.
pub const GENERATOR: &str = "chacha8(seed_from_u64)/log-uniform";

#[derive(Debug, Clone)]
pub struct LogUniform {
    rng: ChaCha8Rng,
    log_lo: f64,
    log_span: f64,
    lo: f64,
    hi: f64,
}

impl LogUniform {
    /// Panics unless `0 < lo <= hi`; callers validate configuration first.
    pub fn new(seed: u64, lo: f64, hi: f64) -> Self {
        assert!(lo > 0.0 && lo <= hi, "invalid sampling box [{lo}, {hi}]");
        LogUniform {
            rng: ChaCha8Rng::seed_from_u64(seed),
            log_lo: lo.ln(),
            log_span: hi.ln() - lo.ln(),
            lo,
            hi,
        }
    }

    pub fn next_value(&mut self) -> f64 {
        let t = (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
        (self.log_lo + t * self.log_span).exp().clamp(self.lo, self.hi)
    }

    pub fn next_triple(&mut self) -> [f64; 3] {
        [self.next_value(), self.next_value(), self.next_value()]
    }

    pub fn next_pair(&mut self) -> [f64; 2] {
        [self.next_value(), self.next_value()]
    }
}

/// The first `n` triples for `seed`.
pub fn triples(seed: u64, lo: f64, hi: f64, n: usize) -> Vec<[f64; 3]> {
    let mut g = LogUniform::new(seed, lo, hi);
    (0..n).map(|_| g.next_triple()).collect()
}

/// The first `n` pairs for `seed`.
pub fn pairs(seed: u64, lo: f64, hi: f64, n: usize) -> Vec<[f64; 2]> {
    let mut g = LogUniform::new(seed, lo, hi);
    (0..n).map(|_| g.next_pair()).collect()
}
