//! Stable seed derivation. Each month-run gets an independent stream derived
//! from the master seed and its coordinates, so runs can be reordered or
//! executed in isolation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG used for every stochastic step in the crate.
pub type SimRng = ChaCha8Rng;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Incremental builder for a derived seed.
#[derive(Debug, Clone, Copy)]
pub struct SeedHasher(u64);

impl SeedHasher {
    pub fn new(master: u64) -> Self {
        let mut h = SeedHasher(FNV_OFFSET);
        h = h.u64(master);
        h
    }

    pub fn bytes(mut self, bytes: &[u8]) -> Self {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(FNV_PRIME);
        }
        // length terminator so ("ab","c") and ("a","bc") differ
        self.0 ^= bytes.len() as u64;
        self.0 = self.0.wrapping_mul(FNV_PRIME);
        self
    }

    pub fn str(self, s: &str) -> Self {
        self.bytes(s.as_bytes())
    }

    pub fn u64(self, v: u64) -> Self {
        self.bytes(&v.to_le_bytes())
    }

    pub fn finish(self) -> u64 {
        splitmix64(self.0)
    }
}

/// Derive a child seed from a parent seed and a tag.
pub fn derive(parent: u64, tag: &str) -> u64 {
    SeedHasher::new(parent).str(tag).finish()
}

pub fn rng_from(seed: u64) -> SimRng {
    SimRng::seed_from_u64(seed)
}
