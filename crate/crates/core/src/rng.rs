//! Reproducible random streams.
//!
//! Every independent unit of randomness (one graph of a collection, the size
//! draw of one benchmark trial, ...) gets its own ChaCha8 stream whose 64-bit
//! seed is derived from a master seed and a path of integer labels. The
//! derivation folds each label into the state with the SplitMix64 finalizer:
//!
//! ```text
//! h0 = splitmix64(master)
//! h_{i+1} = splitmix64(h_i ^ splitmix64(label_i + 0x9E3779B97F4A7C15))
//! ```
//!
//! The streams do not depend on thread scheduling, so graphs may be sampled
//! in parallel.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Folds a sequence of labels into a master seed.
pub fn mix(master: u64, labels: &[u64]) -> u64 {
    labels.iter().fold(splitmix64(master), |h, &label| {
        splitmix64(h ^ splitmix64(label.wrapping_add(GOLDEN_GAMMA)))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn derive(self, labels: &[u64]) -> RngSeed {
        RngSeed(mix(self.0, labels))
    }

    /// Stream used to sample graph `m` of a collection.
    pub fn graph_stream(self, m: usize) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(mix(self.0, &[m as u64]))
    }

    pub fn stream(self, labels: &[u64]) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(mix(self.0, labels))
    }
}

impl From<u64> for RngSeed {
    fn from(s: u64) -> Self {
        RngSeed(s)
    }
}
