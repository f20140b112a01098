//! Seeded random streams.
//!
//! Every stochastic step in the crate draws from a ChaCha8 generator built
//! here, so a `(seed, stream)` pair fully determines its output.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

/// Generator for `seed`, on an independent `stream` (e.g. tree index).
pub fn seeded(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
