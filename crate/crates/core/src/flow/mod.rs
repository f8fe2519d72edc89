// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

//! Hamiltonian time evolution: direct integration of the canonical
//! equations, the reduced position-only system, closed-form solutions in
//! coefficient space and the superintegrals.

mod exact;
mod superint;

use std::cell::Cell;

use serde::{Deserialize, Serialize};

pub use exact::{
    exact_general_flow, exact_goldfish, exact_linear_flow, exact_tilde_flow, internal_clock,
    multiset_deviation, positions_from_e,
};
pub use superint::{jacobian_rank, superintegrals, Superintegrals};

use crate::error::{Error, Result};
use crate::hamfam::{observables, EtaFamily, ObservableSet, PhaseState};
use crate::ode::{integrate_dense, OdeOptions, OdeStats};
use crate::poisson::{observable_value, AnalyticContext, Observable};
use crate::polycore::{check_separation, min_separation, Polynomial};
use crate::tolerance::{self, separation_floor};
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FlowKind {
    /// Flow of `h_k`.
    SingleH { k: usize },
    /// Flow of `h~_k = h_k + alpha e_k`.
    TildeH { k: usize, alpha: C64 },
    /// Flow of `sum_k lambda_k h_k + mu e_1`.
    General { lambda: Vec<C64>, mu: C64 },
}

impl FlowKind {
    pub fn hamiltonian(&self) -> Observable {
        match self {
            FlowKind::SingleH { k } => Observable::H(*k),
            FlowKind::TildeH { k, alpha } => Observable::HTilde { k: *k, alpha: *alpha },
            FlowKind::General { lambda, mu } => Observable::General {
                lambda: lambda.clone(),
                mu: *mu,
            },
        }
    }

    /// Quantities in involution with the Hamiltonian of this flow.
    pub fn conserved(&self, n: usize) -> Vec<Observable> {
        match self {
            FlowKind::SingleH { .. } => (1..=n).map(Observable::H).collect(),
            FlowKind::TildeH { alpha, .. } => (1..=n)
                .map(|k| Observable::HTilde { k, alpha: *alpha })
                .collect(),
            FlowKind::General { .. } => vec![self.hamiltonian()],
        }
    }
}

#[derive(Debug, Clone)]
pub struct FlowSpec {
    pub kind: FlowKind,
    pub family: EtaFamily,
    pub t_span: (f64, f64),
    pub sample_count: usize,
}

impl FlowSpec {
    pub fn new(kind: FlowKind, family: EtaFamily, t_span: (f64, f64), sample_count: usize) -> Result<Self> {
        let n = family.n();
        let index = |k: usize| {
            if k == 0 || k > n {
                Err(Error::IndexOutOfRange { index: k, n })
            } else {
                Ok(())
            }
        };
        match &kind {
            FlowKind::SingleH { k } => index(*k)?,
            FlowKind::TildeH { k, .. } => {
                index(*k)?;
                family.require_goldfish("tilde_h flow")?;
            }
            FlowKind::General { lambda, .. } => {
                family.require_goldfish("general flow")?;
                if lambda.len() != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: lambda.len(),
                    });
                }
            }
        }
        if !(t_span.0.is_finite() && t_span.1.is_finite()) || t_span.1 < t_span.0 {
            return Err(Error::InvalidInput(format!(
                "time span ({}, {}) must be finite and ordered",
                t_span.0, t_span.1
            )));
        }
        if sample_count == 0 {
            return Err(Error::InvalidInput("sample_count must be at least 1".into()));
        }
        Ok(Self {
            kind,
            family,
            t_span,
            sample_count,
        })
    }

    /// Equally spaced sample times covering `t_span`; a single time when the
    /// span is empty.
    pub fn sample_times(&self) -> Vec<f64> {
        sample_times(self.t_span, self.sample_count)
    }
}

pub fn sample_times(t_span: (f64, f64), count: usize) -> Vec<f64> {
    let (t0, t1) = t_span;
    if t1 == t0 || count <= 1 {
        return vec![t0];
    }
    let dt = (t1 - t0) / (count - 1) as f64;
    (0..count)
        .map(|i| if i + 1 == count { t1 } else { t0 + dt * i as f64 })
        .collect()
}

/// `(dp, dq)` with `dq_k = dH/dp_k` and `dp_k = -dH/dq_k`.
pub fn hamilton_rhs(spec: &FlowSpec, state: &PhaseState) -> Result<(Vec<C64>, Vec<C64>)> {
    if state.n() != spec.family.n() {
        return Err(Error::DimensionMismatch {
            expected: spec.family.n(),
            found: state.n(),
        });
    }
    let ctx = AnalyticContext::new(&spec.family, state)?;
    let (_, g) = ctx.evaluate(&spec.kind.hamiltonian())?;
    Ok((g.dq.iter().map(|x| -x).collect(), g.dp))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftEntry {
    pub observable: String,
    pub max_drift: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub family: EtaFamily,
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    pub observables: Vec<ObservableSet>,
    /// Drift of the quantities conserved by the flow.
    pub drift: Vec<DriftEntry>,
    pub stats: OdeStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Column names of [`Trajectory::rows`].
    pub fn header(&self) -> Vec<String> {
        let n = self.family.n();
        let mut cols = vec!["t".to_string()];
        for name in ["q", "p", "e", "h"] {
            for k in 1..=n {
                cols.push(format!("re_{name}{k}"));
                cols.push(format!("im_{name}{k}"));
            }
        }
        cols.push("re_P".into());
        cols.push("im_P".into());
        cols
    }

    /// One row per sample: `t`, then Re/Im pairs of `q`, `p`, `e`, `h`, `P`.
    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.times
            .iter()
            .zip(self.states.iter().zip(&self.observables))
            .map(|(&t, (s, o))| {
                let mut row = vec![t];
                for v in s.q.iter().chain(&s.p).chain(&o.e).chain(&o.h) {
                    row.push(v.re);
                    row.push(v.im);
                }
                row.push(o.total_momentum.re);
                row.push(o.total_momentum.im);
                row
            })
            .collect()
    }
}

/// Relative separation below which a stalled step is attributed to an
/// approaching collision. The vector fields are singular only where
/// positions coincide, and the adaptive step stalls well before the
/// separation reaches the validity floor.
const NEAR_COLLISION: f64 = 1e-3;

fn collision_error(err: Error, time: f64, sample_index: usize) -> Error {
    match err {
        Error::DegenerateConfiguration { min_separation, .. } => Error::TrajectoryCollision {
            time,
            sample_index,
            min_separation,
        },
        other => other,
    }
}

/// Watches separations after each accepted step and turns stalls near a
/// collision into collision errors.
struct CollisionGuard {
    n: usize,
    pending: Cell<usize>,
    last_separation: Cell<f64>,
    last_scale: Cell<f64>,
}

impl CollisionGuard {
    fn new(q: &[C64]) -> Self {
        Self {
            n: q.len(),
            pending: Cell::new(1),
            last_separation: Cell::new(min_separation(q)),
            last_scale: Cell::new(scale_of(q)),
        }
    }

    fn check(&self, t: f64, next: usize, q: &[C64]) -> Result<()> {
        self.pending.set(next);
        let sep = min_separation(q);
        self.last_separation.set(sep);
        self.last_scale.set(scale_of(q));
        if self.n > 1 && !(sep >= separation_floor(q)) {
            return Err(Error::TrajectoryCollision {
                time: t,
                sample_index: next,
                min_separation: sep,
            });
        }
        Ok(())
    }

    fn map(&self, err: Error, t: f64) -> Error {
        collision_error(err, t, self.pending.get())
    }

    fn finish(&self, err: Error) -> Error {
        match err {
            Error::StepSizeUnderflow { time, .. }
                if self.n > 1 && self.last_separation.get() < NEAR_COLLISION * self.last_scale.get() =>
            {
                Error::TrajectoryCollision {
                    time,
                    sample_index: self.pending.get(),
                    min_separation: self.last_separation.get(),
                }
            }
            other => other,
        }
    }
}

fn scale_of(q: &[C64]) -> f64 {
    q.iter().map(|x| x.norm()).fold(1.0, f64::max)
}

/// Integrates Hamilton's equations with dense output at the requested sample
/// times.
pub fn integrate(spec: &FlowSpec, initial: &PhaseState) -> Result<Trajectory> {
    let n = spec.family.n();
    if initial.n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: initial.n(),
        });
    }
    let times = spec.sample_times();
    let guard = CollisionGuard::new(&initial.q);
    let rhs = |t: f64, y: &[C64]| -> Result<Vec<C64>> {
        let s = PhaseState::from_slice(y).map_err(|e| guard.map(e, t))?;
        let (dp, dq) = hamilton_rhs(spec, &s).map_err(|e| guard.map(e, t))?;
        Ok(dp.into_iter().chain(dq).collect())
    };
    let check = |t: f64, next: usize, y: &[C64]| guard.check(t, next, &y[n..]);
    let (ys, stats) = integrate_dense(rhs, &initial.to_vec(), &times, OdeOptions::default(), check)
        .map_err(|e| guard.finish(e))?;
    let mut states = Vec::with_capacity(ys.len());
    let mut obs = Vec::with_capacity(ys.len());
    for (i, y) in ys.iter().enumerate() {
        let s = PhaseState::from_slice(y).map_err(|e| collision_error(e, times[i], i))?;
        obs.push(observables(&spec.family, &s)?);
        states.push(s);
    }
    let mut traj = Trajectory {
        family: spec.family.clone(),
        times,
        states,
        observables: obs,
        drift: Vec::new(),
        stats,
    };
    traj.drift = drift_report(&traj, &spec.kind.conserved(n))?;
    Ok(traj)
}

/// `max_t |f(t) - f(0)| / max(1, |f(0)|)` for each observable.
pub fn drift_report(traj: &Trajectory, conserved: &[Observable]) -> Result<Vec<DriftEntry>> {
    if traj.is_empty() {
        return Err(Error::InvalidInput("empty trajectory".into()));
    }
    conserved
        .iter()
        .map(|obs| {
            let f0 = observable_value(obs, &traj.family, &traj.states[0])?;
            let mut worst = 0.0_f64;
            for s in &traj.states[1..] {
                let f = observable_value(obs, &traj.family, s)?;
                worst = worst.max(tolerance::scaled((f - f0).norm(), f0.norm()));
            }
            Ok(DriftEntry {
                observable: obs.to_string(),
                max_drift: worst,
            })
        })
        .collect()
}

/// Velocities of the position-only system obtained by eliminating the
/// momenta through `eta_k(p_k) = P0(q_k)`:
/// `dq_k = eta_k'(eta_k^{-1}(P0(q_k))) / prod_{r != k} (q_k - q_r)`.
pub fn reduced_rhs(fam: &EtaFamily, p0: &Polynomial, q: &[C64]) -> Result<Vec<C64>> {
    if q.len() != fam.n() {
        return Err(Error::DimensionMismatch {
            expected: fam.n(),
            found: q.len(),
        });
    }
    check_separation(q)?;
    (0..q.len())
        .map(|k| {
            let v = p0.evaluate(q[k]);
            let member = fam.member(k);
            let phi = member.inverse(v);
            if !(phi.re.is_finite() && phi.im.is_finite()) {
                return Err(Error::BranchAmbiguity { index: k, value: v });
            }
            let denom = (0..q.len())
                .filter(|&r| r != k)
                .fold(C64::new(1.0, 0.0), |acc, r| acc * (q[k] - q[r]));
            Ok(member.derivative_at_inverse(v) / denom)
        })
        .collect()
}

/// Integrates the reduced system for positions only.
pub fn integrate_reduced(
    fam: &EtaFamily,
    p0: &Polynomial,
    q0: &[C64],
    times: &[f64],
) -> Result<Vec<Vec<C64>>> {
    let guard = CollisionGuard::new(q0);
    let rhs = |t: f64, q: &[C64]| reduced_rhs(fam, p0, q).map_err(|e| guard.map(e, t));
    let check = |t: f64, next: usize, q: &[C64]| guard.check(t, next, q);
    integrate_dense(rhs, q0, times, OdeOptions::default(), check)
        .map(|(ys, _)| ys)
        .map_err(|e| guard.finish(e))
}
