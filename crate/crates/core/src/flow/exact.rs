// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

//! Closed-form goldfish evolutions in coefficient space.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hamfam::ObservableSet;
use crate::linalg::{expm, expm_apply};
use crate::poisson::build_a;
use crate::polycore::{match_roots, roots, Polynomial, RootSet};
use crate::C64;

/// Below this `|mu t|` the internal clock uses its two-term series.
const CLOCK_SERIES_CUTOFF: f64 = 1e-8;

/// Flow of `h_1`: `e_k(t) = e_k(0) + h_k t`.
pub fn exact_goldfish(initial: &ObservableSet, t: f64) -> Vec<C64> {
    initial.e.iter().zip(&initial.h).map(|(&e, &h)| e + h * t).collect()
}

/// Flow of `h_k`: `(e_0..e_N)(t) = exp(t A^(k)(h)) (e_0..e_N)(0)`; returns
/// `e_1..e_N`.
pub fn exact_linear_flow(k: usize, initial: &ObservableSet, t: f64) -> Result<Vec<C64>> {
    let a = build_a(k, &initial.h_extended())?;
    let e = expm_apply(&a.entries, t, &initial.e_extended());
    Ok(e[1..].to_vec())
}

fn require_h1(initial: &ObservableSet) -> Result<C64> {
    let h1 = initial.h[0];
    if h1.norm() == 0.0 {
        Err(Error::ZeroH1)
    } else {
        Ok(h1)
    }
}

/// Flow of `h~_1 = h_1 + alpha e_1`. Every `h_k` decays as `e^{-alpha t}`
/// and each `h~_k` is conserved, so `e_k(t) = (h~_k(0) - h_k(t)) / alpha`.
pub fn exact_tilde_flow(initial: &ObservableSet, alpha: C64, t: f64) -> Result<(Vec<C64>, Vec<C64>)> {
    if alpha.norm() == 0.0 {
        return Err(Error::ZeroDeformation);
    }
    let h1_0 = require_h1(initial)?;
    let h1 = h1_0 * (-alpha * t).exp();
    let h: Vec<C64> = initial.h.iter().map(|&hk| hk / h1_0 * h1).collect();
    let e = initial
        .h
        .iter()
        .zip(&initial.e)
        .zip(&h)
        .map(|((&h0, &e0), &ht)| (h0 + alpha * e0 - ht) / alpha)
        .collect();
    Ok((h, e))
}

/// `tau(t) = int_0^t h_1(s) ds` with `h_1(s) = h_1(0) e^{-mu s}`.
pub fn internal_clock(h1_0: C64, mu: C64, t: f64) -> C64 {
    let x = mu * t;
    if x.norm() < CLOCK_SERIES_CUTOFF {
        h1_0 * t * (1.0 - x * 0.5)
    } else {
        h1_0 * (1.0 - (-x).exp()) / mu
    }
}

/// Flow of `sum_k lambda_k h_k + mu e_1`. The `h` decay as `e^{-mu t}`,
/// so with `rho = h / h_1` frozen, `de/dtau = M e` where
/// `M = sum_k lambda_k A^(k)(rho)` and `tau` is the internal clock.
pub fn exact_general_flow(
    initial: &ObservableSet,
    lambda: &[C64],
    mu: C64,
    t: f64,
) -> Result<(Vec<C64>, Vec<C64>)> {
    let n = initial.n();
    if lambda.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: lambda.len(),
        });
    }
    let h1_0 = require_h1(initial)?;
    let rho: Vec<C64> = initial.h_extended().iter().map(|&h| h / h1_0).collect();
    let mut m = DMatrix::<C64>::zeros(n + 1, n + 1);
    for (k, &l) in lambda.iter().enumerate() {
        if l.norm() != 0.0 {
            m += build_a(k + 1, &rho)?.entries * l;
        }
    }
    let tau = internal_clock(h1_0, mu, t);
    let decay = (-mu * t).exp();
    let h = initial.h.iter().map(|&x| x * decay).collect();
    let e0 = nalgebra::DVector::from_vec(initial.e_extended());
    let e = expm(&(m * tau)) * e0;
    Ok((h, e.iter().skip(1).copied().collect()))
}

/// Roots of `z^N - sum_k e_k z^{N-k}`.
pub fn positions_from_e(e: &[C64]) -> Result<RootSet> {
    let mut coeffs = vec![C64::new(1.0, 0.0)];
    coeffs.extend(e.iter().map(|x| -x));
    roots(&Polynomial::new(coeffs))
}

/// Largest distance between `a` and `b` after optimal relabelling.
pub fn multiset_deviation(a: &[C64], b: &[C64]) -> Result<f64> {
    let m = match_roots(&RootSet::new(a.to_vec()), &RootSet::new(b.to_vec()))?;
    Ok(a
        .iter()
        .zip(&m.ordered.roots)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max))
}
