//! The one pseudo-random generator used throughout: ChaCha with 8 rounds (`rand_chacha`),
//! whose output stream is fixed by the algorithm and identical on every platform.
//!
//! A generator is addressed by `(seed, stream)`. Samplers use the stream to separate
//! independent draws that share a seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64, stream: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
