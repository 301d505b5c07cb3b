//! Seeding rules shared by every randomized stage.
//!
//! All randomness comes from [`ChaCha8Rng`], which is portable and produces
//! the same stream on every platform. Independent substreams are derived
//! from a master seed with [`derive_seed`], a SplitMix64 finalizer applied to
//! the master seed mixed with a stage tag and an index:
//!
//! ```text
//! derive_seed(master, tag, index) = mix(mix(master ^ mix(tag)) ^ index)
//! ```
//!
//! The graph samplers additionally assign every unordered vertex pair its
//! own fixed window of the ChaCha8 stream (see [`PairStream`]), so output does
//! not depend on how pairs are split across threads.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stage tags used with [`derive_seed`].
pub mod stage {
    pub const EIGEN: u64 = 1;
    pub const KMEANS: u64 = 2;
    pub const INIT: u64 = 3;
    pub const SPLIT: u64 = 4;
    pub const GRAPH: u64 = 5;
    pub const SHUFFLE: u64 = 6;
    pub const RESTART: u64 = 7;
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives the seed of substream `index` of stage `tag` from `master`.
pub fn derive_seed(master: u64, tag: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master ^ splitmix64(tag)) ^ index)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
pub fn unit_f64(word: u64) -> f64 {
    (word >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Random access into the per-pair streams of a graph sample.
///
/// Pair index `k` owns 32-bit words `[4k, 4k + 4)` of the ChaCha8 stream
/// seeded with the sample seed, i.e. exactly two `u64` draws: one for edge
/// presence and one for orientation. Reading pairs in lexicographic order
/// therefore consumes the stream sequentially.
pub struct PairStream {
    rng: ChaCha8Rng,
}

impl PairStream {
    pub const WORDS_PER_PAIR: u128 = 4;

    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Positions the stream at the start of pair `pair_index`.
    pub fn seek(&mut self, pair_index: u64) {
        self.rng
            .set_word_pos(pair_index as u128 * Self::WORDS_PER_PAIR);
    }

    /// The two uniforms `(presence, orientation)` of the current pair.
    pub fn next_pair(&mut self) -> (f64, f64) {
        let a = self.rng.next_u64();
        let b = self.rng.next_u64();
        (unit_f64(a), unit_f64(b))
    }
}

/// Lexicographic index of the unordered pair `(u, v)`, `u < v < n`.
pub fn pair_index(u: usize, v: usize, n: usize) -> u64 {
    debug_assert!(u < v && v < n);
    let (u, v, n) = (u as u64, v as u64, n as u64);
    u * (2 * n - u - 1) / 2 + (v - u - 1)
}
