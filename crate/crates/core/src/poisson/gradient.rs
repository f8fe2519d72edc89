// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::hamfam::{observables, EtaFamily, PhaseState};
use crate::polycore::LagrangeBasis;
use crate::tolerance;
use crate::C64;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// `(df/dp_k, df/dq_k)` for k = 1..N.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Gradient {
    pub dp: Vec<C64>,
    pub dq: Vec<C64>,
}

impl Gradient {
    pub fn zeros(n: usize) -> Self {
        Self {
            dp: vec![zero(); n],
            dq: vec![zero(); n],
        }
    }

    fn axpy(&mut self, a: C64, other: &Gradient) {
        for (x, y) in self.dp.iter_mut().zip(&other.dp) {
            *x += a * y;
        }
        for (x, y) in self.dq.iter_mut().zip(&other.dq) {
            *x += a * y;
        }
    }
}

/// `{f, g}` from two gradients, with the largest single product as scale.
pub fn bracket_of(f: &Gradient, g: &Gradient) -> (C64, f64) {
    let mut value = zero();
    let mut scale = 0.0_f64;
    for j in 0..f.dp.len() {
        let a = f.dp[j] * g.dq[j];
        let b = f.dq[j] * g.dp[j];
        value += a - b;
        scale = scale.max(a.norm()).max(b.norm());
    }
    (value, scale)
}

/// Node values `alpha_k(p, q)` together with their first derivatives;
/// `dp[k][j] = d alpha_k / d p_j`, likewise `dq`.
#[derive(Debug, Clone)]
pub struct NodeJet {
    pub values: Vec<C64>,
    pub dp: Vec<Vec<C64>>,
    pub dq: Vec<Vec<C64>>,
}

/// A rule assigning values (with derivatives) to the nodes `q_k`; the
/// interpolating polynomial through them defines one polynomial family.
pub trait NodeValues {
    fn jet(&self, state: &PhaseState) -> Result<NodeJet>;
}

fn diagonal_jet(values: Vec<C64>, dp_diag: Vec<C64>, dq_diag: Vec<C64>) -> NodeJet {
    let n = values.len();
    let mut dp = vec![vec![zero(); n]; n];
    let mut dq = vec![vec![zero(); n]; n];
    for k in 0..n {
        dp[k][k] = dp_diag[k];
        dq[k][k] = dq_diag[k];
    }
    NodeJet { values, dp, dq }
}

/// `alpha_k = eta_k(p_k)`: the family polynomial `H`.
pub struct FamilyNodes<'a>(pub &'a EtaFamily);

impl NodeValues for FamilyNodes<'_> {
    fn jet(&self, state: &PhaseState) -> Result<NodeJet> {
        let fam = self.0;
        let values = fam.node_values(state)?;
        let dp = (0..state.n()).map(|k| fam.member(k).derivative(state.p[k])).collect();
        Ok(diagonal_jet(values, dp, vec![zero(); state.n()]))
    }
}

/// `alpha_k = q_k^N`: the polynomial `z^N - E_N(z|q)` whose coefficients are `e_k`.
pub struct PowerNodes;

impl NodeValues for PowerNodes {
    fn jet(&self, state: &PhaseState) -> Result<NodeJet> {
        let n = state.n() as u32;
        let values = state.q.iter().map(|q| q.powu(n)).collect();
        let dq = state.q.iter().map(|q| q.powu(n - 1) * n as f64).collect();
        Ok(diagonal_jet(values, vec![zero(); state.n()], dq))
    }
}

/// `alpha_k = eta_k(p_k) + alpha q_k^N`.
pub struct DeformedNodes<'a> {
    pub family: &'a EtaFamily,
    pub alpha: C64,
}

impl NodeValues for DeformedNodes<'_> {
    fn jet(&self, state: &PhaseState) -> Result<NodeJet> {
        let mut jet = FamilyNodes(self.family).jet(state)?;
        let pow = PowerNodes.jet(state)?;
        for k in 0..state.n() {
            jet.values[k] += self.alpha * pow.values[k];
            jet.dq[k][k] += self.alpha * pow.dq[k][k];
        }
        Ok(jet)
    }
}

/// Fixed node values, independent of `p` and `q`.
pub struct FixedNodes(pub Vec<C64>);

impl NodeValues for FixedNodes {
    fn jet(&self, state: &PhaseState) -> Result<NodeJet> {
        if self.0.len() != state.n() {
            return Err(Error::DimensionMismatch {
                expected: state.n(),
                found: self.0.len(),
            });
        }
        Ok(diagonal_jet(self.0.clone(), vec![zero(); state.n()], vec![zero(); state.n()]))
    }
}

/// Polynomial coefficients `a_1..a_N` with their gradients.
#[derive(Debug, Clone)]
pub struct CoefficientJet {
    pub node: NodeJet,
    pub values: Vec<C64>,
    pub grads: Vec<Gradient>,
    /// `A'(q_k)`.
    pub node_slopes: Vec<C64>,
}

/// Differentiates the Lagrange representation in closed form. Taking
/// `d/dq_j` of `A(q_k) = alpha_k` shows that `dA/dq_j` interpolates
/// `d alpha_k/dq_j - delta_jk A'(q_k)`, so
/// `da/dq_j = sum_k (d alpha_k/dq_j) l_k - A'(q_j) l_j` and
/// `da/dp_j = sum_k (d alpha_k/dp_j) l_k`.
pub fn coefficient_jet(
    source: &dyn NodeValues,
    state: &PhaseState,
    basis: &LagrangeBasis,
) -> Result<CoefficientJet> {
    let n = state.n();
    let node = source.jet(state)?;
    let poly = basis.polynomial(&node.values);
    let slope = poly.derivative();
    let node_slopes: Vec<C64> = state.q.iter().map(|&q| slope.evaluate(q)).collect();
    let mut grads = vec![Gradient::zeros(n); n];
    for j in 0..n {
        for k in 0..n {
            let ap = node.dp[k][j];
            let mut aq = node.dq[k][j];
            if k == j {
                aq -= node_slopes[j];
            }
            if ap == zero() && aq == zero() {
                continue;
            }
            for (r, &b) in basis.basis(k).iter().enumerate() {
                grads[r].dp[j] += ap * b;
                grads[r].dq[j] += aq * b;
            }
        }
    }
    Ok(CoefficientJet {
        values: poly.into_coeffs(),
        node,
        grads,
        node_slopes,
    })
}

/// Named observable on phase space. Indices are 1-based as in `h_1..h_N`.
#[derive(Debug, Clone, PartialEq)]
pub enum Observable {
    H(usize),
    E(usize),
    TotalMomentum,
    HTilde { k: usize, alpha: C64 },
    Lambda(usize, usize),
    General { lambda: Vec<C64>, mu: C64 },
}

impl fmt::Display for Observable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Observable::H(k) => write!(f, "h{k}"),
            Observable::E(k) => write!(f, "e{k}"),
            Observable::TotalMomentum => f.write_str("P"),
            Observable::HTilde { k, .. } => write!(f, "htilde{k}"),
            Observable::Lambda(k, l) => write!(f, "lambda_{k}_{l}"),
            Observable::General { .. } => f.write_str("H"),
        }
    }
}

impl Serialize for Observable {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Parses `hK`, `eK`, `P` and `lambda_K_L`. Deformed and general
/// Hamiltonians carry parameters and are built in code.
impl FromStr for Observable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownObservable(s.to_string());
        if s == "P" {
            return Ok(Observable::TotalMomentum);
        }
        if let Some(rest) = s.strip_prefix("lambda_") {
            let (k, l) = rest.split_once('_').ok_or_else(bad)?;
            return Ok(Observable::Lambda(
                k.parse().map_err(|_| bad())?,
                l.parse().map_err(|_| bad())?,
            ));
        }
        if let Some(k) = s.strip_prefix('h') {
            return k.parse().map(Observable::H).map_err(|_| bad());
        }
        if let Some(k) = s.strip_prefix('e') {
            return k.parse().map(Observable::E).map_err(|_| bad());
        }
        Err(bad())
    }
}

impl Observable {
    fn check(&self, n: usize) -> Result<()> {
        let idx = |i: usize| {
            if i == 0 || i > n {
                Err(Error::IndexOutOfRange { index: i, n })
            } else {
                Ok(())
            }
        };
        match self {
            Observable::H(k) | Observable::E(k) | Observable::HTilde { k, .. } => idx(*k),
            Observable::Lambda(k, l) => idx(*k).and(idx(*l)),
            Observable::TotalMomentum => Ok(()),
            Observable::General { lambda, .. } => {
                if lambda.len() == n {
                    Ok(())
                } else {
                    Err(Error::DimensionMismatch {
                        expected: n,
                        found: lambda.len(),
                    })
                }
            }
        }
    }

    fn needs_goldfish(&self) -> Option<&'static str> {
        match self {
            Observable::HTilde { .. } => Some("deformed Hamiltonian"),
            Observable::Lambda(..) => Some("superintegral"),
            Observable::General { .. } => Some("general Hamiltonian"),
            _ => None,
        }
    }
}

/// Coefficient jets of `H` and `E` at one phase point; further observables
/// are assembled from them by the product rule.
pub struct AnalyticContext<'a> {
    fam: &'a EtaFamily,
    state: &'a PhaseState,
    basis: LagrangeBasis,
    h: CoefficientJet,
    e: CoefficientJet,
}

impl<'a> AnalyticContext<'a> {
    pub fn new(fam: &'a EtaFamily, state: &'a PhaseState) -> Result<Self> {
        let basis = LagrangeBasis::new(&state.q)?;
        let h = coefficient_jet(&FamilyNodes(fam), state, &basis)?;
        let e = coefficient_jet(&PowerNodes, state, &basis)?;
        Ok(Self {
            fam,
            state,
            basis,
            h,
            e,
        })
    }

    pub fn h_jet(&self) -> &CoefficientJet {
        &self.h
    }

    pub fn e_jet(&self) -> &CoefficientJet {
        &self.e
    }

    pub fn basis(&self) -> &LagrangeBasis {
        &self.basis
    }

    pub fn evaluate(&self, obs: &Observable) -> Result<(C64, Gradient)> {
        let n = self.state.n();
        obs.check(n)?;
        if let Some(what) = obs.needs_goldfish() {
            self.fam.require_goldfish(what)?;
        }
        let pick = |jet: &CoefficientJet, k: usize| (jet.values[k - 1], jet.grads[k - 1].clone());
        Ok(match obs {
            Observable::H(k) => pick(&self.h, *k),
            Observable::E(k) => pick(&self.e, *k),
            Observable::TotalMomentum => {
                let mut g = Gradient::zeros(n);
                g.dp.iter_mut().for_each(|x| *x = C64::new(1.0, 0.0));
                (self.state.p.iter().sum(), g)
            }
            Observable::HTilde { k, alpha } => {
                let jet = coefficient_jet(
                    &DeformedNodes {
                        family: self.fam,
                        alpha: *alpha,
                    },
                    self.state,
                    &self.basis,
                )?;
                pick(&jet, *k)
            }
            Observable::Lambda(k, l) => {
                let (ek, gek) = pick(&self.e, *k);
                let (el, gel) = pick(&self.e, *l);
                let (hk, ghk) = pick(&self.h, *k);
                let (hl, ghl) = pick(&self.h, *l);
                let mut g = Gradient::zeros(n);
                g.axpy(hl, &gek);
                g.axpy(ek, &ghl);
                g.axpy(-hk, &gel);
                g.axpy(-el, &ghk);
                (ek * hl - el * hk, g)
            }
            Observable::General { lambda, mu } => {
                let mut value = *mu * self.e.values[0];
                let mut g = Gradient::zeros(n);
                g.axpy(*mu, &self.e.grads[0]);
                for (k, &l) in lambda.iter().enumerate() {
                    value += l * self.h.values[k];
                    g.axpy(l, &self.h.grads[k]);
                }
                (value, g)
            }
        })
    }
}

/// Value only, computed from scratch through the observables module.
pub fn observable_value(obs: &Observable, fam: &EtaFamily, state: &PhaseState) -> Result<C64> {
    obs.check(state.n())?;
    if let Some(what) = obs.needs_goldfish() {
        fam.require_goldfish(what)?;
    }
    if let Observable::TotalMomentum = obs {
        return Ok(state.p.iter().sum());
    }
    let set = observables(fam, state)?;
    Ok(match obs {
        Observable::H(k) => set.h[k - 1],
        Observable::E(k) => set.e[k - 1],
        Observable::HTilde { k, alpha } => set.h[k - 1] + alpha * set.e[k - 1],
        Observable::Lambda(k, l) => set.e[k - 1] * set.h[l - 1] - set.e[l - 1] * set.h[k - 1],
        Observable::General { lambda, mu } => {
            lambda.iter().zip(&set.h).map(|(&l, &h)| l * h).sum::<C64>() + mu * set.e[0]
        }
        Observable::TotalMomentum => unreachable!(),
    })
}

/// Central differences for a holomorphic function of the phase-space
/// coordinates, stepping along both the real and imaginary axes and
/// averaging `(D_re - i D_im) / 2`.
pub fn finite_difference_gradient<F>(f: F, state: &PhaseState) -> Result<Gradient>
where
    F: Fn(&PhaseState) -> Result<C64>,
{
    let n = state.n();
    let y = state.to_vec();
    let mut out = Vec::with_capacity(2 * n);
    let i = C64::new(0.0, 1.0);
    for j in 0..2 * n {
        let h = tolerance::FD_STEP * y[j].norm().max(1.0);
        let eval = |delta: C64| -> Result<C64> {
            let mut z = y.clone();
            z[j] += delta;
            f(&PhaseState::from_slice(&z)?)
        };
        let d_re = (eval(C64::new(h, 0.0))? - eval(C64::new(-h, 0.0))?) / (2.0 * h);
        let d_im = (eval(C64::new(0.0, h))? - eval(C64::new(0.0, -h))?) / (2.0 * h);
        out.push((d_re - i * d_im) * 0.5);
    }
    Ok(Gradient {
        dp: out[..n].to_vec(),
        dq: out[n..].to_vec(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketRoute {
    Analytic,
    FiniteDiff,
}

/// Gradient of `obs` by the chosen route.
pub fn gradient(
    obs: &Observable,
    fam: &EtaFamily,
    state: &PhaseState,
    route: BracketRoute,
) -> Result<Gradient> {
    match route {
        BracketRoute::Analytic => Ok(AnalyticContext::new(fam, state)?.evaluate(obs)?.1),
        BracketRoute::FiniteDiff => {
            // surface index/family errors before differencing
            observable_value(obs, fam, state)?;
            finite_difference_gradient(|s| observable_value(obs, fam, s), state)
        }
    }
}

/// `{f, g} = sum_j (df/dp_j dg/dq_j - df/dq_j dg/dp_j)`.
pub fn bracket(
    f: &Observable,
    g: &Observable,
    fam: &EtaFamily,
    state: &PhaseState,
    route: BracketRoute,
) -> Result<C64> {
    Ok(bracket_scaled(f, g, fam, state, route)?.0)
}

/// Bracket value together with the magnitude of its largest term.
pub fn bracket_scaled(
    f: &Observable,
    g: &Observable,
    fam: &EtaFamily,
    state: &PhaseState,
    route: BracketRoute,
) -> Result<(C64, f64)> {
    let gf = gradient(f, fam, state, route)?;
    let gg = gradient(g, fam, state, route)?;
    Ok(bracket_of(&gf, &gg))
}
