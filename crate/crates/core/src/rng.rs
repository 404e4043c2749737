//! Counter-based random streams.
//!
//! Randomness inside a step is never drawn from a shared sequential
//! generator. Each consumer derives its own stream from
//! `(seed, step, agent, purpose)` so results do not depend on the order in
//! which agents are processed or on how many threads run the step.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::vector::BeliefVector;

/// What a stream is used for. Distinct purposes never share a stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamPurpose {
    Init = 1,
    Respawn = 2,
    Selection = 3,
    Leader = 4,
}

/// Stream key used for draws that are not tied to one agent.
pub const WORLD_STREAM: u64 = u64::MAX;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic generator for one `(seed, step, agent, purpose)` tuple.
pub fn stream(seed: u64, step: u64, agent: u64, purpose: StreamPurpose) -> ChaCha8Rng {
    let mut h = splitmix64(seed);
    h = splitmix64(h ^ step);
    h = splitmix64(h ^ agent);
    h = splitmix64(h ^ purpose as u64);
    ChaCha8Rng::seed_from_u64(h)
}

/// Uniform direction on the unit hypersphere: Gaussian components, normalized.
pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, dimensions: usize) -> BeliefVector {
    loop {
        let v = BeliefVector::from_fn(dimensions, |_| rng.sample(StandardNormal));
        if let Ok(u) = v.normalize() {
            return u;
        }
    }
}

/// Uniform point in the cube `[-half, half]^dimensions`.
pub fn random_in_cube<R: Rng + ?Sized>(rng: &mut R, dimensions: usize, half: f64) -> BeliefVector {
    BeliefVector::from_fn(dimensions, |_| rng.random_range(-half..=half))
}

pub fn random_speed<R: Rng + ?Sized>(rng: &mut R, min: f64, max: f64) -> f64 {
    if max > min {
        rng.random_range(min..=max)
    } else {
        min
    }
}
