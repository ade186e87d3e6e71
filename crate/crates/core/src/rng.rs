//! Seeded random streams.
//!
//! Every random draw in the crate comes from a [`RandomStream`] built by
//! [`stream`]. The splitting rule is: a work item identified by a path of
//! integers (experiment id, grid index, ...) gets the seed
//! [`derive_seed`]`(master, path)`; replicate `r` of that item uses ChaCha
//! stream number `r` under that seed. Results therefore depend only on the
//! master seed and the item's position, never on how work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type RandomStream = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mixes `path` into `master` to give an independent child seed.
pub fn derive_seed(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix64(master), |acc, &p| {
        splitmix64(acc ^ splitmix64(p))
    })
}

/// Stream `index` under `seed`.
pub fn stream(seed: u64, index: u64) -> RandomStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}
