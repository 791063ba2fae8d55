//! Seeded, stream-addressable randomness.
//!
//! Every replication of every experiment draws from its own ChaCha8 stream
//! keyed by `(seed, stream_id)`, so results never depend on how work is
//! scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngStream {
    pub seed: u64,
    pub stream_id: u64,
}

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RngStream {
    pub const fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// The generator for this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Stream `index` of the family labelled `purpose` under this stream's seed.
    ///
    /// Distinct purposes get unrelated seeds, so e.g. the simulated paths and
    /// the reference samples of an experiment never share randomness.
    pub fn substream(&self, purpose: u64, index: u64) -> RngStream {
        let seed = splitmix64(self.seed ^ splitmix64(purpose ^ splitmix64(self.stream_id)));
        RngStream::new(seed, index)
    }
}
