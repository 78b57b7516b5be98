//! Counter-based random streams.
//!
//! Every random draw in the crate comes from a stream keyed by `(seed, index)`,
//! where `index` names the unit of work (a sample pair, an outer Monte Carlo
//! sample, a lattice edge). Work items can therefore be evaluated in any order
//! and on any number of threads without changing the numbers they see.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Returns the random stream for work item `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
