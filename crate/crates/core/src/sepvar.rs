// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

//! Separation of variables: the invariant polynomial `P0`, the action
//! `S(q) = sum_k int_0^{q_k} phi_k(P0(y)) dy`, the constants
//! `beta_l = sum_k int_0^{q_k} y^{N-l} / eta_k'(phi_k(P0(y))) dy` and
//! recovery of momenta from positions.
//!
//! All contours are straight segments from 0. For the goldfish family
//! `phi = log` is continued along each segment from its principal value
//! at `P0(0)`, and a segment passing through a zero of `P0` is an error.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamfam::{family_polynomial, EtaFamily, PhaseState};
use crate::polycore::{roots, Polynomial};
use crate::quadrature::{distance_to_segment, segment_integral, NODES};
use crate::tolerance;
use crate::C64;

/// Relative distance from a contour to a zero of `P0` treated as a hit.
const CONTOUR_CLEARANCE: f64 = 1e-8;
/// Half-width of the window around a half-turn in which the nearest
/// logarithm branch is considered undecidable.
const BRANCH_MARGIN: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct SeparationData {
    pub p0: Polynomial,
    pub family: EtaFamily,
    /// Zeros of `P0`; only computed for the goldfish family.
    pub p0_roots: Vec<C64>,
}

impl SeparationData {
    /// `P0` frozen at `state`.
    pub fn new(family: &EtaFamily, state: &PhaseState) -> Result<Self> {
        Self::from_polynomial(family, family_polynomial(family, state)?)
    }

    pub fn from_polynomial(family: &EtaFamily, p0: Polynomial) -> Result<Self> {
        let p0_roots = if family.is_goldfish() {
            let trimmed = p0.trimmed(0.0);
            if trimmed.leading().norm() == 0.0 {
                return Err(Error::InvalidInput("P0 vanishes identically".into()));
            }
            roots(&trimmed)?.roots
        } else {
            Vec::new()
        };
        Ok(Self {
            p0,
            family: family.clone(),
            p0_roots,
        })
    }

    pub fn n(&self) -> usize {
        self.family.n()
    }

    /// Evaluation points per quadrature panel.
    pub fn quadrature_nodes(&self) -> usize {
        NODES
    }

    fn check_contour(&self, index: usize, z: C64) -> Result<()> {
        let clearance = CONTOUR_CLEARANCE * z.norm().max(1.0);
        for &r in &self.p0_roots {
            let d = distance_to_segment(r, z);
            if d <= clearance {
                return Err(Error::ContourSingularity {
                    index,
                    singular_point: r,
                    distance: d,
                });
            }
        }
        Ok(())
    }

    /// `log P0(y)` continued along `[0, y]` from the principal value at 0.
    fn continued_log(&self, y: C64) -> C64 {
        let base = self.p0.evaluate(C64::new(0.0, 0.0)).ln();
        self.p0_roots
            .iter()
            .fold(base, |acc, &r| acc + (1.0 - y / r).ln())
    }

    /// `phi_k(P0(y))`, on the continued branch for the goldfish family.
    fn phi(&self, k: usize, y: C64) -> C64 {
        if self.family.is_goldfish() {
            self.continued_log(y)
        } else {
            self.family.member(k).inverse(self.p0.evaluate(y))
        }
    }

    fn check_q(&self, q: &[C64]) -> Result<()> {
        if q.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: q.len(),
            });
        }
        Ok(())
    }

    fn contour_sum<F>(&self, q: &[C64], integrand: F) -> Result<C64>
    where
        F: Fn(usize, C64) -> C64,
    {
        self.check_q(q)?;
        let mut total = C64::new(0.0, 0.0);
        for (k, &z) in q.iter().enumerate() {
            if z.norm() == 0.0 {
                continue;
            }
            self.check_contour(k, z)?;
            let quad = segment_integral(|y| integrand(k, y), z, tolerance::QUADRATURE_REL)
                .map_err(|e| Error::QuadratureFailure {
                    index: k,
                    estimated_error: e.estimated_error,
                })?;
            total += quad.value;
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentumRecovery {
    /// `max_k |P0(q_k) - eta_k(p_k)| / max(1, |eta_k(p_k)|)`.
    pub residual: f64,
    /// `phi_k(P0(q_k))`, branch chosen nearest the state's own momenta.
    pub recovered: Vec<C64>,
}

/// Checks that `state` lies on the invariant curve of `sep`.
pub fn momentum_recovery_check(sep: &SeparationData, state: &PhaseState) -> Result<MomentumRecovery> {
    sep.check_q(&state.q)?;
    let mut residual = 0.0_f64;
    for k in 0..state.n() {
        let eta = sep.family.member(k).value(state.p[k]);
        let r = (sep.p0.evaluate(state.q[k]) - eta).norm();
        residual = residual.max(tolerance::scaled(r, eta.norm()));
    }
    let recovered = recover_momenta(sep, &state.q, Some(&state.p))?;
    Ok(MomentumRecovery {
        residual,
        recovered,
    })
}

/// `p_k = phi_k(P0(q_k))`. For the goldfish family the logarithm branch is
/// the one nearest `previous` when given, the principal one otherwise.
pub fn recover_momenta(sep: &SeparationData, q: &[C64], previous: Option<&[C64]>) -> Result<Vec<C64>> {
    sep.check_q(q)?;
    (0..q.len())
        .map(|k| {
            let v = sep.p0.evaluate(q[k]);
            let p = sep.family.member(k).inverse(v);
            if !(p.re.is_finite() && p.im.is_finite()) {
                return Err(Error::BranchAmbiguity { index: k, value: v });
            }
            match previous {
                Some(prev) if sep.family.is_goldfish() => {
                    let turns = (prev[k].im - p.im) / (2.0 * PI);
                    if (turns - turns.floor() - 0.5).abs() < BRANCH_MARGIN {
                        return Err(Error::BranchAmbiguity { index: k, value: v });
                    }
                    Ok(p + C64::new(0.0, 2.0 * PI * turns.round()))
                }
                _ => Ok(p),
            }
        })
        .collect()
}

/// Momenta along a sampled position path, unwrapping the logarithm from
/// `p_initial`. Consecutive samples whose branches jump by more than a
/// quarter turn are reported as ambiguous.
pub fn track_momenta(sep: &SeparationData, path: &[Vec<C64>], p_initial: &[C64]) -> Result<Vec<Vec<C64>>> {
    let mut prev = p_initial.to_vec();
    let mut out = Vec::with_capacity(path.len());
    for q in path {
        let p = recover_momenta(sep, q, Some(&prev))?;
        for k in 0..p.len() {
            if (p[k].im - prev[k].im).abs() > 0.5 * PI {
                return Err(Error::BranchAmbiguity {
                    index: k,
                    value: sep.p0.evaluate(q[k]),
                });
            }
        }
        prev = p.clone();
        out.push(p);
    }
    Ok(out)
}

/// `S(q) = sum_k int_0^{q_k} phi_k(P0(y)) dy`.
pub fn action(sep: &SeparationData, q: &[C64]) -> Result<C64> {
    sep.contour_sum(q, |k, y| sep.phi(k, y))
}

/// `beta_1..beta_N`.
pub fn beta_constants(sep: &SeparationData, q: &[C64]) -> Result<Vec<C64>> {
    let n = sep.n();
    (1..=n)
        .map(|l| {
            let power = (n - l) as u32;
            sep.contour_sum(q, |k, y| {
                let slope = sep.family.member(k).derivative_at_inverse(sep.p0.evaluate(y));
                y.powu(power) / slope
            })
        })
        .collect()
}

/// A zero of `P0` swept by the straight contour `[0, q_k]` between two
/// consecutive samples of a path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeriodCrossing {
    /// Index of the later sample.
    pub sample: usize,
    pub k: usize,
    pub pole: C64,
    /// +1 when the swept triangle `0, q_k(prev), q_k(next)` is
    /// counterclockwise.
    pub orientation: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BetaTrack {
    /// `beta` continued along the path: straight-contour values plus the
    /// periods picked up at each crossing.
    pub values: Vec<Vec<C64>>,
    pub crossings: Vec<PeriodCrossing>,
}

/// Twice the signed area of the triangle `0, a, b`.
fn cross(a: C64, b: C64) -> f64 {
    (a.conj() * b).im
}

/// `beta` along a sampled position path, continued so that the contours
/// follow the path instead of jumping across zeros of `P0`.
///
/// Moving the endpoint of `[0, q_k]` from `a` to `b` changes the straight
/// integral by the chord integral minus the loop integral around the
/// triangle `0, a, b`, i.e. by `2 pi i` times the residues of
/// `y^{N-l} / P0(y)` inside it. Each such pole is reported and its period
/// added back. A pole within clearance of the chord is a
/// `ContourSingularity`. The path must be sampled finely enough that no
/// pole lies between a chord and the true path.
pub fn track_beta(sep: &SeparationData, path: &[Vec<C64>]) -> Result<BetaTrack> {
    let n = sep.n();
    let dp0 = sep.p0.derivative();
    let coeff_scale = sep.p0.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
    let mut values = Vec::with_capacity(path.len());
    let mut crossings = Vec::new();
    let mut correction = vec![C64::new(0.0, 0.0); n];
    for (i, q) in path.iter().enumerate() {
        sep.check_q(q)?;
        if i > 0 {
            let prev = &path[i - 1];
            for k in 0..n {
                let (a, b) = (prev[k], q[k]);
                let area = cross(a, b);
                for &r in &sep.p0_roots {
                    let d = distance_to_segment(r - a, b - a);
                    if d <= CONTOUR_CLEARANCE * a.norm().max(b.norm()).max(1.0) {
                        return Err(Error::ContourSingularity {
                            index: k,
                            singular_point: r,
                            distance: d,
                        });
                    }
                    // strictly inside: same side of all three edges
                    let s1 = cross(a, r);
                    let s2 = cross(b - a, r - a);
                    let s3 = cross(-b, r - b);
                    let inside = area != 0.0
                        && s1.signum() == area.signum()
                        && s2.signum() == area.signum()
                        && s3.signum() == area.signum();
                    if !inside {
                        continue;
                    }
                    let slope = dp0.evaluate(r);
                    if slope.norm() <= tolerance::ROOT_RECONSTRUCTION * coeff_scale {
                        return Err(Error::InvalidInput(format!("repeated zero of P0 at {r} swept by contour {k}")));
                    }
                    let w = area.signum();
                    for l in 1..=n {
                        let res = r.powu((n - l) as u32) / slope;
                        correction[l - 1] += C64::new(0.0, 2.0 * PI * w) * res;
                    }
                    crossings.push(PeriodCrossing {
                        sample: i,
                        k,
                        pole: r,
                        orientation: w as i8,
                    });
                }
            }
        }
        let straight = beta_constants(sep, q)?;
        values.push(straight.iter().zip(&correction).map(|(s, c)| s + c).collect());
    }
    Ok(BetaTrack { values, crossings })
}

/// `beta_l = sum_k q_k^{N-l+1} / (N-l+1)` for the linear family.
pub fn beta_linear_closed_form(q: &[C64]) -> Vec<C64> {
    let n = q.len();
    (1..=n)
        .map(|l| {
            let m = (n - l + 1) as u32;
            q.iter().map(|x| x.powu(m)).sum::<C64>() / m as f64
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HamiltonJacobiCheck {
    /// `max_k |dS/dq_k - phi_k(P0(q_k))|`, scaled.
    pub residual: f64,
}

/// Finite-difference gradient of the action against `phi_k(P0(q_k))`.
pub fn hamilton_jacobi_check(sep: &SeparationData, q: &[C64]) -> Result<HamiltonJacobiCheck> {
    sep.check_q(q)?;
    let mut residual = 0.0_f64;
    for k in 0..q.len() {
        let h = tolerance::FD_STEP * q[k].norm().max(1.0);
        let shifted = |d: C64| -> Result<C64> {
            let mut z = q.to_vec();
            z[k] += d;
            action(sep, &z)
        };
        let d_re = (shifted(C64::new(h, 0.0))? - shifted(C64::new(-h, 0.0))?) / (2.0 * h);
        let d_im = (shifted(C64::new(0.0, h))? - shifted(C64::new(0.0, -h))?) / (2.0 * h);
        let grad = (d_re - C64::new(0.0, 1.0) * d_im) * 0.5;
        let want = sep.phi(k, q[k]);
        residual = residual.max(tolerance::scaled((grad - want).norm(), want.norm()));
    }
    Ok(HamiltonJacobiCheck { residual })
}
