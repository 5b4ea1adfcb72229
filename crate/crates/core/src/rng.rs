//! Seeded random streams.
//!
//! Every random draw in a simulation comes from a [`SimRng`] whose seed is a
//! SHA-256 mix of the master seed and a path of stream indices (SNR point,
//! trial, purpose). Trials therefore never share state and results do not
//! depend on the order or thread on which trials run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

pub type SimRng = ChaCha8Rng;

/// Stream purposes used under a trial seed.
pub mod stream {
    pub const INSTANCE: u64 = 0;
    pub const DETECTOR: u64 = 1;
    pub const ESTIMATOR: u64 = 2;
}

/// Mixes a seed with a path of stream indices into a 32-byte seed.
pub fn mix_seed(seed: u64, path: &[u64]) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(seed.to_le_bytes());
    for p in path {
        hasher.update(p.to_le_bytes());
    }
    let digest = hasher.finalize();
    let mut out = [0u8; 32];
    out.copy_from_slice(&digest);
    out
}

/// First eight bytes of [`mix_seed`], for nesting seeds.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    let bytes = mix_seed(seed, path);
    u64::from_le_bytes(bytes[..8].try_into().unwrap())
}

pub fn stream_rng(seed: u64, path: &[u64]) -> SimRng {
    SimRng::from_seed(mix_seed(seed, path))
}
