//! Counter-based random streams.
//!
//! A stream is a pure function of `(master_seed, lane, index)`: the seed and
//! lane form a ChaCha key, the index selects the ChaCha stream. Path `i` of an
//! ensemble always reads from stream `i` no matter which thread generates it,
//! so ensembles are reproducible under any parallel schedule.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

/// Lane of the drift `z` within a path's stream.
pub const DRIFT_LANE: u64 = 1;
/// Lane of the driving Brownian motion `W` within a path's stream.
pub const NOISE_LANE: u64 = 2;
/// Family of the ensemble used to estimate moments for fitted curves, kept
/// apart from the evaluation ensemble.
pub const FIT_LANE: u64 = 3;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Identifies a family of streams; [`StreamKey::stream`] picks one member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamKey {
    seed: u64,
    lane: u64,
}

impl StreamKey {
    pub fn new(master_seed: u64) -> Self {
        StreamKey {
            seed: master_seed,
            lane: 0,
        }
    }

    /// A disjoint family derived from this one.
    pub fn lane(self, tag: u64) -> Self {
        StreamKey {
            seed: self.seed,
            lane: mix64(self.lane ^ mix64(tag.wrapping_add(GOLDEN))),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(self, index: u64) -> RandomStream {
        let words = [self.seed, self.lane, mix64(self.seed), mix64(self.lane ^ GOLDEN)];
        let mut key = [0u8; 32];
        for (chunk, w) in key.chunks_exact_mut(8).zip(words) {
            chunk.copy_from_slice(&w.to_le_bytes());
        }
        let mut rng = ChaCha12Rng::from_seed(key);
        rng.set_stream(index);
        RandomStream { rng, key: self, index }
    }
}

/// An independent pseudo-random stream addressed by `(key, index)`.
#[derive(Debug, Clone)]
pub struct RandomStream {
    rng: ChaCha12Rng,
    key: StreamKey,
    index: u64,
}

impl RandomStream {
    /// Child stream for an independent sub-task of the same path (e.g. the
    /// noise `W` versus the drift `z`). Does not depend on how many numbers
    /// this stream has already produced.
    pub fn substream(&self, tag: u64) -> RandomStream {
        self.key.lane(tag).stream(self.index)
    }

    pub fn index(&self) -> u64 {
        self.index
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

/// Stream `path_index` of the root family of `master_seed`.
pub fn derive_stream(master_seed: u64, path_index: u64) -> RandomStream {
    StreamKey::new(master_seed).stream(path_index)
}
