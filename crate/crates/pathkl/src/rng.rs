//! Counter-based random number streams for reproducible parallel simulation.
//!
//! Every draw is a pure function of `(master_seed, path_index, counter)`, so a
//! batch of paths can be simulated in any order, on any number of threads, and
//! produce bit-identical results. Normal variates use the Box-Muller transform
//! over two counter-indexed uniforms.

use std::f64::consts::PI;

const GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;
const PATH_SALT: u64 = 0x5851_f42d_4c95_7f2d;

/// SplitMix64 output function: a bijective avalanche mix on 64 bits.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Derive an independent sub-seed for a named purpose (forward batch, reverse
/// batch, dataset sampling, ...) so streams never collide across stages.
pub fn derive_seed(master_seed: u64, domain: u64) -> u64 {
    mix(master_seed ^ mix(domain.wrapping_mul(GAMMA) ^ PATH_SALT))
}

/// Random-access stream of standard normals for one path.
///
/// The stream is stateless: `normal(i)` may be called in any order and always
/// returns the same value for the same `(master_seed, path_index, i)`.
#[derive(Debug, Clone, Copy)]
pub struct PathStream {
    key: u64,
}

impl PathStream {
    pub fn new(master_seed: u64, path_index: u64) -> Self {
        let key = mix(master_seed.wrapping_add(mix(path_index.wrapping_mul(GAMMA) ^ PATH_SALT)));
        PathStream { key }
    }

    #[inline]
    fn word(&self, counter: u64) -> u64 {
        mix(self.key.wrapping_add(counter.wrapping_mul(GAMMA)))
    }

    /// Uniform in the open interval (0, 1).
    #[inline]
    pub fn uniform(&self, counter: u64) -> f64 {
        ((self.word(counter) >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal draw at index `i` (consumes two uniform counters).
    #[inline]
    pub fn normal(&self, i: u64) -> f64 {
        let u1 = self.uniform(2 * i);
        let u2 = self.uniform(2 * i + 1);
        (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
    }

    /// Fill `out` with consecutive normals starting at index `start`.
    pub fn fill_normal(&self, start: u64, out: &mut [f64]) {
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = self.normal(start + j as u64);
        }
    }
}
