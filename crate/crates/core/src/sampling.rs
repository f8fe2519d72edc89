// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

//! Seeded random phase states for property sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hamfam::PhaseState;
use crate::polycore::min_separation;
use crate::C64;

/// Minimum pairwise distance of sampled positions.
pub const MIN_SEPARATION: f64 = 0.1;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn unit_square<R: Rng>(rng: &mut R) -> C64 {
    C64::new(rng.gen_range(-1.0..=1.0), rng.gen_range(-1.0..=1.0))
}

/// `p` uniform in the square `[-1, 1]^2` of the complex plane; `q` uniform
/// in the same square, redrawn until all pairs are at least
/// [`MIN_SEPARATION`] apart.
pub fn random_state<R: Rng>(rng: &mut R, n: usize) -> PhaseState {
    random_state_with(rng, n, 1.0, MIN_SEPARATION)
}

/// As [`random_state`] with positions in `[-half_width, half_width]^2`.
pub fn random_state_with<R: Rng>(rng: &mut R, n: usize, half_width: f64, separation: f64) -> PhaseState {
    let p: Vec<C64> = (0..n).map(|_| unit_square(rng)).collect();
    loop {
        let q: Vec<C64> = (0..n).map(|_| unit_square(rng) * half_width).collect();
        if n < 2 || min_separation(&q) >= separation {
            return PhaseState::new(p, q).expect("separated sample");
        }
    }
}

/// Uniform complex sample in the unit square.
pub fn random_complex<R: Rng>(rng: &mut R) -> C64 {
    unit_square(rng)
}
