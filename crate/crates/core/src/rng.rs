//! Counter-based substreams so parallel work never shares a sequential
//! generator. A stream is addressed by the root seed plus a path of
//! indices, e.g. `(replicate, draw)` or `(grid point, replicate, role)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomSource {
    pub seed: u64,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self { seed }
    }

    /// Deterministic generator for the given index path.
    pub fn substream(&self, path: &[u64]) -> ChaCha8Rng {
        let mut key = splitmix64(self.seed);
        for (depth, &p) in path.iter().enumerate() {
            let salt = splitmix64(p ^ GOLDEN.wrapping_mul(depth as u64 + 1));
            key = splitmix64(key ^ salt);
        }
        let mut seed = [0u8; 32];
        let mut state = key;
        for chunk in seed.chunks_mut(8) {
            state = splitmix64(state);
            chunk.copy_from_slice(&state.to_le_bytes());
        }
        ChaCha8Rng::from_seed(seed)
    }

    pub fn stream(&self, replicate: u64, draw: u64) -> ChaCha8Rng {
        self.substream(&[replicate, draw])
    }
}
