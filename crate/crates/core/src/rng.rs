//! Deterministic counter-based random number streams.
//!
//! Each stream is addressed by `(master seed, stream index)`. Distinct indices
//! are decorrelated by pushing the index through a 64-bit mixing permutation
//! before xor-ing with the seed, so trajectory `i` always sees the same
//! numbers no matter which worker thread runs it.

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

#[inline]
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A splittable pseudo-random stream (splitmix64 core).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    state: u64,
}

impl RngStream {
    pub fn new(seed: u64, index: u64) -> Self {
        let salt = mix64(index.wrapping_mul(GOLDEN).wrapping_add(GOLDEN));
        RngStream {
            state: mix64(seed ^ salt),
        }
    }

    /// Stream for a sub-task, independent of this stream's consumption state.
    pub fn derive(seed: u64, index: u64, sub: u64) -> Self {
        RngStream::new(seed ^ mix64(sub.wrapping_add(1).wrapping_mul(GOLDEN)), index)
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN);
        mix64(self.state)
    }

    /// Uniform in [0, 1) with 53 random bits.
    #[inline]
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Uniform integer in [0, bound) by rejection-free multiply-shift.
    #[inline]
    pub fn next_below(&mut self, bound: u64) -> u64 {
        ((self.next_u64() as u128 * bound as u128) >> 64) as u64
    }
}
