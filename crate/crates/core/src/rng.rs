//! Splittable, reproducible random streams.
//!
//! Every experiment derives its generators from a 64-bit master seed. A
//! [`SeedStream`] can be split by tag (one child per sub-experiment) and
//! indexed by trial; the generator for `(seed, tag path, trial)` never
//! depends on how trials are scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type LabRng = ChaCha8Rng;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SeedStream {
    seed: u64,
}

impl SeedStream {
    pub fn new(seed: u64) -> Self {
        SeedStream { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream identified by `tag`.
    pub fn child(&self, tag: u64) -> SeedStream {
        SeedStream {
            seed: splitmix64(self.seed ^ splitmix64(tag.wrapping_add(0x51_7cc1_b727_220a))),
        }
    }

    /// Child stream keyed by a string label.
    pub fn labeled(&self, label: &str) -> SeedStream {
        // FNV-1a keeps labels stable across platforms and compiler versions.
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in label.bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        self.child(h)
    }

    /// Generator for trial `index`.
    pub fn rng(&self, index: u64) -> LabRng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }
}
