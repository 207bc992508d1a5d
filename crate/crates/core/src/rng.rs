//! Seeded sampling shared by the checks and experiments.
//!
//! Each sample stream is keyed by `(seed, label, index)`, so a sample does not
//! depend on how many others were drawn before it or on which thread drew it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const DEFAULT_SEED: u64 = 20240501;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

pub fn stream(seed: u64, label: &str, index: u64) -> ChaCha8Rng {
    let key = seed ^ fnv1a(label.as_bytes()).rotate_left(17) ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    ChaCha8Rng::seed_from_u64(key)
}

/// Standard normal entries.
pub fn normal_vector(n: usize, seed: u64, label: &str, index: u64) -> Vec<f64> {
    let mut rng = stream(seed, label, index);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Standard normal scalar.
pub fn normal_scalar(seed: u64, label: &str, index: u64) -> f64 {
    StandardNormal.sample(&mut stream(seed, label, index))
}
