//! SplitMix64, the single randomness source of a run.

use crate::hash::sha256;

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// A SplitMix64 stream.
///
/// Every random draw in a simulation (link drops, jitter, prover blindings,
/// signature nonces) comes from a stream forked off the run seed with a
/// distinct label, so adding a consumer never perturbs another one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub const fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    /// Stream seeded with `seed ^ low64(SHA-256(label))`, where the low 64
    /// bits are the last eight digest bytes read big-endian.
    pub fn fork(seed: u64, label: &[u8]) -> Self {
        let digest = sha256(&[label]);
        let mut low = [0u8; 8];
        low.copy_from_slice(&digest[24..]);
        Self::new(seed ^ u64::from_be_bytes(low))
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform draw from `[0, bound)` by rejection. `bound` must be non-zero.
    pub fn below(&mut self, bound: u64) -> u64 {
        assert!(bound > 0, "empty range");
        let zone = u64::MAX - (u64::MAX % bound);
        loop {
            let v = self.next_u64();
            if v < zone {
                return v % bound;
            }
        }
    }

    /// Uniform draw from `[0, bound]`.
    pub fn up_to(&mut self, bound: u64) -> u64 {
        if bound == u64::MAX {
            self.next_u64()
        } else {
            self.below(bound + 1)
        }
    }

    pub fn fill_bytes(&mut self, out: &mut [u8]) {
        for chunk in out.chunks_mut(8) {
            let word = self.next_u64().to_be_bytes();
            chunk.copy_from_slice(&word[..chunk.len()]);
        }
    }
}
