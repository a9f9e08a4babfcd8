//! Seeded randomness.
//!
//! Every random decision in the crate draws from [`ChaCha8Rng`] seeded with
//! `seed_from_u64`. Shuffles are a plain Fisher-Yates pass from the last index
//! down, drawing `j` uniformly from `0..=i`, so partitions can be replayed from
//! a seed alone.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type SeededRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive a stage seed: the first 8 bytes (little-endian) of
/// `SHA-256(seed.to_le_bytes() || stage)`.
pub fn derive_seed(seed: u64, stage: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(stage.as_bytes());
    let digest = h.finalize();
    let mut b = [0u8; 8];
    b.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(b)
}

pub fn shuffle<T>(items: &mut [T], rng: &mut SeededRng) {
    for i in (1..items.len()).rev() {
        let j = rng.gen_range(0..=i);
        items.swap(i, j);
    }
}
