//! Seeded random streams.
//!
//! Every Monte Carlo trial gets its own ChaCha stream: the master seed picks
//! the key and the trial counter picks the stream, so trial `t` sees the same
//! numbers no matter how trials are scheduled across workers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn stream(master: u64, counter: u64) -> Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(counter);
    rng
}
