//! Seeded random streams.
//!
//! Every replication gets its own stream of a ChaCha8 generator keyed by the
//! master seed, so results do not depend on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub type SimRng = ChaCha8Rng;

/// Master seed recorded alongside every simulated result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSeed(pub u64);

impl RngSeed {
    pub fn stream(self, index: u64) -> SimRng {
        stream(self.0, index)
    }
}

/// Independent generator for `(seed, index)`.
pub fn stream(seed: u64, index: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
