//! Seed splitting: every random stream in the crate is derived from one user
//! seed plus a stream counter, so results do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Generator for stream `stream` under `seed`.
pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Namespaced stream ids so different consumers of one seed never collide.
pub mod purpose {
    pub const DATASET: u64 = 0;
    pub const INIT: u64 = 1 << 40;
    pub const SHUFFLE: u64 = 2 << 40;
    pub const TARGETS: u64 = 3 << 40;
    pub const SPLIT: u64 = 4 << 40;
}
