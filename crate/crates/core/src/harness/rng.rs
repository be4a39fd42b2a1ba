//! Seed derivation and ordered parallel replicates.
//!
//! Every replicate draws from its own ChaCha8 stream seeded with the first
//! eight bytes (little endian) of
//! `SHA-256(master_seed_le ‖ tag_len_le ‖ tag ‖ index_le)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

/// The generator used for every replicate.
pub type ReplicateRng = ChaCha8Rng;

/// Stable 64-bit seed for replicate `index` of experiment `tag`.
pub fn derive_seed(master: u64, tag: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    h.update((tag.len() as u64).to_le_bytes());
    h.update(tag.as_bytes());
    h.update(index.to_le_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

pub fn replicate_rng(master: u64, tag: &str, index: u64) -> ReplicateRng {
    ChaCha8Rng::seed_from_u64(derive_seed(master, tag, index))
}

/// Runs `f` for replicates `0..reps` in parallel; results come back in
/// replicate order regardless of the number of workers.
pub fn par_replicates<T, F>(master: u64, tag: &str, reps: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64, &mut ReplicateRng) -> T + Sync + Send,
{
    (0..reps)
        .into_par_iter()
        .map(|i| {
            let mut rng = replicate_rng(master, tag, i);
            f(i, &mut rng)
        })
        .collect()
}
