//! Seeded random instances for the randomized suites.

use crate::cmv::VerblunskySequence;
use crate::mcmv::PoleVector;
use crate::scalar::{C64, ZERO};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::TAU;

/// Environment variable holding the base seed of randomized suites.
pub const SEED_ENV: &str = "MCMV_SEED";

/// Base seed from MCMV_SEED, or the given default.
pub fn base_seed(default: u64) -> u64 {
    std::env::var(SEED_ENV).ok().and_then(|s| s.trim().parse().ok()).unwrap_or(default)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random point with modulus in [r_lo, r_hi) and uniform argument.
pub fn disk_point(rng: &mut impl Rng, r_lo: f64, r_hi: f64) -> C64 {
    C64::from_polar(rng.gen_range(r_lo..r_hi), rng.gen_range(0.0..TAU))
}

/// Random phase-periodic instance with |a_k| <= a_max and distinct poles of
/// modulus in [0.1, 0.7) separated by at least 0.1.
pub fn instance(rng: &mut impl Rng, n: usize, a_max: f64) -> (VerblunskySequence, PoleVector) {
    let vals: Vec<C64> = (0..2 * n).map(|_| disk_point(rng, 0.0, a_max)).collect();
    let theta = rng.gen_range(0.0..TAU);
    let mut poles = vec![ZERO];
    while poles.len() < n {
        let z = disk_point(rng, 0.1, 0.7);
        if poles.iter().all(|p| (p - z).norm() > 0.1) {
            poles.push(z);
        }
    }
    (
        VerblunskySequence::from_values(&vals, theta).expect("valid block"),
        PoleVector::from_values(&poles).expect("distinct poles"),
    )
}

/// Convenience wrapper with a fixed seed and |a_k| < 0.8.
pub fn instance_seeded(n: usize, seed: u64) -> (VerblunskySequence, PoleVector) {
    instance(&mut rng(seed), n, 0.8)
}
