//! Counter-based random streams.
//!
//! Every random quantity in an experiment is drawn from a stream keyed by
//! `(seed, purpose, index)`. Streams with different keys never overlap, so a
//! trial's randomness does not depend on which worker ran it or in what order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// What a stream is used for. Part of the stream key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Purpose {
    Design,
    Infection,
    TieBreak,
    Sampling,
}

impl Purpose {
    fn tag(self) -> u64 {
        match self {
            Purpose::Design => 1,
            Purpose::Infection => 2,
            Purpose::TieBreak => 3,
            Purpose::Sampling => 4,
        }
    }
}

const INDEX_BITS: u32 = 56;

/// A reproducible stream of random bits.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    /// Stream for `(seed, purpose, index)`. `index` is truncated to 56 bits.
    pub fn new(seed: u64, purpose: Purpose, index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((purpose.tag() << INDEX_BITS) | (index & ((1 << INDEX_BITS) - 1)));
        Self { rng }
    }

    /// Uniform integer in `0..bound`. Panics if `bound == 0`.
    pub fn below(&mut self, bound: usize) -> usize {
        use rand::Rng;
        self.rng.random_range(0..bound as u64) as usize
    }

    /// Uniform real in `[0, 1)` with 53 bits of precision.
    pub fn unit(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// SplitMix64 finaliser.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed derived from the master seed and trial index.
pub fn trial_seed(master_seed: u64, trial: u64) -> u64 {
    mix(master_seed ^ mix(trial))
}
