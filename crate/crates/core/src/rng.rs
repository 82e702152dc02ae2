//! Seeded random streams.
//!
//! Every stochastic operation takes a 64-bit seed. Independent purposes
//! (generator, replica `r`, sweep cell `c`, ...) get their own stream by
//! mixing the seed with a stream id through splitmix64, so results never
//! depend on how work is scheduled across threads.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

/// One round of the splitmix64 finalizer.
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive the seed of sub-stream `stream` of `seed`.
pub fn derive(seed: u64, stream: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ stream.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

pub fn stream(seed: u64, stream: u64) -> StreamRng {
    StreamRng::seed_from_u64(derive(seed, stream))
}

/// Well-known stream ids so that, e.g., a generator and a sampler fed the
/// same user seed never share random numbers.
pub mod ids {
    pub const GENERATOR: u64 = 1;
    pub const FOREST_FIRE: u64 = 2;
    pub const LIVE_EDGE: u64 = 3;
    pub const SIMULATION: u64 = 4;
    pub const RANDOM_DEFENSE: u64 = 5;
    pub const WEIGHTS: u64 = 6;
    pub const GREEDY_BLOCKING: u64 = 7;
}

/// FNV-1a, used for content hashes that must be stable across platforms.
#[derive(Clone, Copy, Debug)]
pub struct Fnv64(u64);

impl Default for Fnv64 {
    fn default() -> Self {
        Fnv64(0xcbf2_9ce4_8422_2325)
    }
}

impl Fnv64 {
    pub fn write_u64(&mut self, v: u64) {
        for b in v.to_le_bytes() {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01B3);
        }
    }

    pub fn finish(&self) -> u64 {
        self.0
    }
}
