// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

//! Numerical thresholds shared across the crate.
//!
//! Identity checks compare a residual against `tol * max(1, |largest term|)`
//! so that `e^p` factors spanning several orders of magnitude do not make
//! fixed absolute thresholds meaningless.

/// Relative node separation below which a configuration counts as degenerate.
pub const SEPARATION_REL: f64 = 1e-8;

/// Interpolation residual, relative to the largest prescribed value.
pub const INTERPOLATION: f64 = 1e-10;

/// Coefficient-wise reconstruction residual accepted from root extraction.
pub const ROOT_RECONSTRUCTION: f64 = 1e-8;

/// Two root assignments whose costs differ by less than this (scaled) are
/// reported as ambiguous.
pub const MATCH_GAP: f64 = 1e-6;

/// Relative step used by the central finite-difference gradient.
pub const FD_STEP: f64 = 1e-6;

/// Agreement between analytic and finite-difference brackets.
pub const FD_AGREEMENT: f64 = 1e-6;

/// Agreement between the two routes computing the family coefficients.
pub const ROUTE_AGREEMENT: f64 = 1e-10;

/// Bracket identities that hold exactly in the algebra.
pub const IDENTITY: f64 = 1e-8;

/// Identities that reduce to a single bracket with no cancellation.
pub const IDENTITY_TIGHT: f64 = 1e-10;

/// Commutator of structure matrices, relative to `scale^2`.
pub const COMMUTATOR: f64 = 1e-12;

/// Relative and absolute local error targets for the adaptive integrator.
pub const RK_REL: f64 = 1e-10;
pub const RK_ABS: f64 = 1e-12;

/// Relative target for contour quadrature.
pub const QUADRATURE_REL: f64 = 1e-10;

/// Relative singular-value cutoff for numerical rank.
pub const RANK_REL: f64 = 1e-8;

/// Scaled residual `|residual| / max(1, scale)`.
pub fn scaled(residual: f64, scale: f64) -> f64 {
    residual / scale.max(1.0)
}

/// Minimum admissible separation for a node set.
pub fn separation_floor(nodes: &[num_complex::Complex64]) -> f64 {
    let max_abs = nodes.iter().map(|q| q.norm()).fold(0.0, f64::max);
    SEPARATION_REL * max_abs.max(1.0)
}
