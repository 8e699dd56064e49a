//! Seeded random number streams.
//!
//! Every Monte Carlo routine takes an [`McConfig`] carrying a base seed and a
//! replication count. Replicate `i` draws from `substream(seed, i)`, a
//! counter-indexed stream of one ChaCha generator, so results do not depend on
//! evaluation order and rerunning with the same seed reproduces every byte.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ImError, Result};

/// Monte Carlo settings shared across the library.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    /// Number of replicates for the estimate at hand.
    pub n_rep: usize,
    /// Base seed; all substreams derive from it.
    pub seed: u64,
}

impl McConfig {
    pub fn new(n_rep: usize, seed: u64) -> Self {
        McConfig { n_rep, seed }
    }

    /// Default replication count: standard error of a proportion at most 0.005.
    pub fn with_seed(seed: u64) -> Self {
        McConfig {
            n_rep: 10_000,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rep == 0 {
            return Err(ImError::NoReplicates);
        }
        Ok(())
    }

    /// Generator for one replicate (or one well-separated purpose).
    pub fn substream(&self, index: u64) -> ChaCha8Rng {
        substream(self.seed, index)
    }

    /// Binomial standard error of a proportion estimate `p` at this replication count.
    pub fn proportion_stderr(&self, p: f64) -> f64 {
        (p.clamp(0.0, 1.0) * (1.0 - p.clamp(0.0, 1.0)) / self.n_rep as f64).sqrt()
    }
}

/// Counter-indexed substream `index` of the base generator for `seed`.
pub fn substream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
