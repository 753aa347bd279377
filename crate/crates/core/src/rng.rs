//! Seeded random streams.
//!
//! Every stochastic routine draws from a ChaCha8 generator keyed by the master seed. Independent
//! consumers are separated by the ChaCha stream id, and per-item generators (one document in
//! held-out scoring, one trial in a simulation) additionally mix the item index into the key.
//! Stream ids used by the library:
//!
//! * `0`: the main Gibbs chain of a training run.
//! * `1 + fold * n_candidates + candidate`: cross-validation training chains.
//! * `HELDOUT_STREAM | x`: held-out scoring paired with training stream `x`.
//! * `FOLD_SPLIT_STREAM`: the permutation that assigns documents to folds.
//! * `SIMULATION_STREAM`: birth-process simulation trials.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub const HELDOUT_STREAM: u64 = 1 << 63;
pub const FOLD_SPLIT_STREAM: u64 = (1 << 62) + 1;
pub const SIMULATION_STREAM: u64 = (1 << 62) + 2;

pub type ChainRng = ChaCha8Rng;

/// Generator for one stream of the master seed.
pub fn stream_rng(seed: u64, stream: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Generator for item `index` of a stream.
pub fn item_rng(seed: u64, stream: u64, index: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(index)));
    rng.set_stream(stream);
    rng
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}
