//! Reproducible random streams.
//!
//! Every stream is a ChaCha20 generator whose key holds (seed, role) and
//! whose stream number is the replica index, so the variates of a replica
//! do not depend on how work is scheduled across threads. Normals come from
//! the Box–Muller transform applied to consecutive uniform pairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

/// What a stream is used for; part of the key.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Role {
    Cholesky = 1,
    StationaryField = 2,
    Increments = 3,
    Brownian = 4,
    Slnd = 5,
}

pub fn stream(seed: u64, replica: u64, role: Role) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(role as u64).to_le_bytes());
    let mut rng = ChaCha20Rng::from_seed(key);
    rng.set_stream(replica);
    rng
}

/// Uniform on (0, 1].
fn open_uniform(rng: &mut ChaCha20Rng) -> f64 {
    // 53 random bits mapped to {1, ..., 2^53}·2^{-53}
    ((rng.gen::<u64>() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Fill `out` with independent standard normals.
pub fn fill_normals(rng: &mut ChaCha20Rng, out: &mut [f64]) {
    let mut chunks = out.chunks_exact_mut(2);
    for pair in &mut chunks {
        let (a, b) = box_muller(rng);
        pair[0] = a;
        pair[1] = b;
    }
    if let [last] = chunks.into_remainder() {
        *last = box_muller(rng).0;
    }
}

pub fn normals(rng: &mut ChaCha20Rng, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n];
    fill_normals(rng, &mut v);
    v
}

fn box_muller(rng: &mut ChaCha20Rng) -> (f64, f64) {
    let u1 = open_uniform(rng);
    let u2 = rng.gen::<f64>();
    let r = (-2.0 * u1.ln()).sqrt();
    let th = 2.0 * std::f64::consts::PI * u2;
    (r * th.cos(), r * th.sin())
}

pub fn uniform(rng: &mut ChaCha20Rng) -> f64 {
    rng.gen::<f64>()
}
