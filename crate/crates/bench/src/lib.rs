//! Shared helpers for the criterion benchmarks.

use csst_core::words::PeriodicWord;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Deterministic batch of eventually periodic words.
pub fn word_batch(count: usize, seed: u64) -> Vec<PeriodicWord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let pre: Vec<u8> = (0..rng.gen_range(0..=12usize))
                .map(|_| rng.gen_range(1..=3))
                .collect();
            let per: Vec<u8> = (0..rng.gen_range(1..=6usize))
                .map(|_| rng.gen_range(1..=3))
                .collect();
            PeriodicWord::from_values(&pre, &per, 3).unwrap()
        })
        .collect()
}
