//! Seed mixing and stream derivation.
//!
//! Every random quantity in a run comes from a ChaCha8 generator seeded by a
//! 64-bit stream seed. Stream seeds are derived from a parent seed with
//! [`derive_seed`], which applies SplitMix64 finalization twice:
//!
//! ```text
//! derive_seed(parent, index) = splitmix64(parent ^ splitmix64(index + 0x9E3779B97F4A7C15))
//! ```
//!
//! Within a simulation, stream 0 draws initial conditions and stream
//! `1 + j` draws the Poisson events of the `j`-th noise source (declaration
//! order). Sweep child seeds use `derive_seed(master_seed, run_index)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(parent: u64, index: u64) -> u64 {
    splitmix64(parent ^ splitmix64(index.wrapping_add(GOLDEN)))
}

pub fn stream(parent: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(parent, index))
}
