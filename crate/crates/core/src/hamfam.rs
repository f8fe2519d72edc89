// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

//! Eta families and the observables built from them: the family polynomial
//! `H(z|p,q)` interpolating `eta_k(p_k)` at the nodes `q_k`, its
//! coefficients `h_1..h_N` (`h_1` multiplies `z^(N-1)`), the signed
//! elementary symmetric functions `e_k`, total momentum `P`, and the
//! deformed Hamiltonians `h_k + alpha e_k` and `sum lambda_k h_k + mu e_1`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::polycore::{check_separation, elementary_sym, LagrangeBasis, Polynomial};
use crate::tolerance;
use crate::C64;

/// Canonical coordinates with `{p_i, q_j} = delta_ij`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseState {
    pub p: Vec<C64>,
    pub q: Vec<C64>,
}

impl PhaseState {
    pub fn new(p: Vec<C64>, q: Vec<C64>) -> Result<Self> {
        if p.len() != q.len() {
            return Err(Error::DimensionMismatch {
                expected: q.len(),
                found: p.len(),
            });
        }
        if q.is_empty() {
            return Err(Error::InvalidInput("phase state needs N >= 1".into()));
        }
        check_separation(&q)?;
        Ok(Self { p, q })
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    /// Packs as `[p_1..p_N, q_1..q_N]`.
    pub fn to_vec(&self) -> Vec<C64> {
        self.p.iter().chain(&self.q).copied().collect()
    }

    pub fn from_slice(y: &[C64]) -> Result<Self> {
        let n = y.len() / 2;
        Self::new(y[..n].to_vec(), y[n..].to_vec())
    }

    /// Translates every position by `a`.
    pub fn translated(&self, a: C64) -> Self {
        Self {
            p: self.p.clone(),
            q: self.q.iter().map(|&x| x + a).collect(),
        }
    }
}

/// One member of an eta family: the value function, its derivative and
/// its inverse.
pub trait Eta: Send + Sync + fmt::Debug {
    fn value(&self, p: C64) -> C64;
    fn derivative(&self, p: C64) -> C64;
    fn inverse(&self, x: C64) -> C64;
    /// `eta'(eta^{-1}(x))`.
    fn derivative_at_inverse(&self, x: C64) -> C64 {
        self.derivative(self.inverse(x))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ExpEta;

impl Eta for ExpEta {
    fn value(&self, p: C64) -> C64 {
        p.exp()
    }
    fn derivative(&self, p: C64) -> C64 {
        p.exp()
    }
    /// Principal branch.
    fn inverse(&self, x: C64) -> C64 {
        x.ln()
    }
    fn derivative_at_inverse(&self, x: C64) -> C64 {
        x
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IdentityEta;

impl Eta for IdentityEta {
    fn value(&self, p: C64) -> C64 {
        p
    }
    fn derivative(&self, _p: C64) -> C64 {
        C64::new(1.0, 0.0)
    }
    fn inverse(&self, x: C64) -> C64 {
        x
    }
}

/// Eta member assembled from closures, for code-level extensions.
pub struct FnEta<V, D, I> {
    pub value: V,
    pub derivative: D,
    pub inverse: I,
}

impl<V, D, I> fmt::Debug for FnEta<V, D, I> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("FnEta")
    }
}

impl<V, D, I> Eta for FnEta<V, D, I>
where
    V: Fn(C64) -> C64 + Send + Sync,
    D: Fn(C64) -> C64 + Send + Sync,
    I: Fn(C64) -> C64 + Send + Sync,
{
    fn value(&self, p: C64) -> C64 {
        (self.value)(p)
    }
    fn derivative(&self, p: C64) -> C64 {
        (self.derivative)(p)
    }
    fn inverse(&self, x: C64) -> C64 {
        (self.inverse)(x)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyKind {
    Goldfish,
    Linear,
    Custom,
}

impl FromStr for FamilyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "goldfish" => Ok(FamilyKind::Goldfish),
            "linear" => Ok(FamilyKind::Linear),
            other => Err(Error::UnknownFamily(other.to_string())),
        }
    }
}

/// Rectangle of the complex momentum plane on which a family's triple is
/// declared consistent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleDomain {
    pub re: [f64; 2],
    pub im: [f64; 2],
}

impl Default for SampleDomain {
    /// Inside the principal strip of the complex logarithm.
    fn default() -> Self {
        Self {
            re: [-2.0, 2.0],
            im: [-1.5, 1.5],
        }
    }
}

impl SampleDomain {
    pub fn grid(&self, per_side: usize) -> Vec<C64> {
        let lerp = |r: [f64; 2], i: usize| {
            if per_side == 1 {
                0.5 * (r[0] + r[1])
            } else {
                r[0] + (r[1] - r[0]) * i as f64 / (per_side - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(per_side * per_side);
        for i in 0..per_side {
            for j in 0..per_side {
                out.push(C64::new(lerp(self.re, i), lerp(self.im, j)));
            }
        }
        out
    }
}

/// Worst residuals of the sampled `(eta, eta', phi)` consistency checks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FamilyConsistency {
    pub inverse_residual: f64,
    pub derivative_residual: f64,
}

/// Registration threshold on `|phi(eta(p)) - p|`, relative.
pub const INVERSE_TOL: f64 = 1e-10;
/// Registration threshold on `eta'` against central differences, relative.
pub const DERIVATIVE_TOL: f64 = 1e-6;

#[derive(Clone)]
pub struct EtaFamily {
    kind: FamilyKind,
    name: String,
    members: Vec<Arc<dyn Eta>>,
}

impl fmt::Debug for EtaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("EtaFamily")
            .field("name", &self.name)
            .field("n", &self.members.len())
            .finish()
    }
}

/// One stateless member shared by all particles.
fn shared(member: Arc<dyn Eta>, n: usize) -> Vec<Arc<dyn Eta>> {
    vec![member; n]
}

impl EtaFamily {
    pub fn goldfish(n: usize) -> Self {
        Self {
            kind: FamilyKind::Goldfish,
            name: "goldfish".into(),
            members: shared(Arc::new(ExpEta), n),
        }
    }

    pub fn linear(n: usize) -> Self {
        Self {
            kind: FamilyKind::Linear,
            name: "linear".into(),
            members: shared(Arc::new(IdentityEta), n),
        }
    }

    /// Registers a user-supplied family after checking each member on a
    /// grid over `domain`.
    pub fn custom(
        name: impl Into<String>,
        members: Vec<Arc<dyn Eta>>,
        domain: SampleDomain,
    ) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidInput("family needs N >= 1 members".into()));
        }
        let fam = Self {
            kind: FamilyKind::Custom,
            name: name.into(),
            members,
        };
        fam.verify(domain)?;
        Ok(fam)
    }

    pub fn kind(&self) -> FamilyKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n(&self) -> usize {
        self.members.len()
    }

    pub fn member(&self, k: usize) -> &dyn Eta {
        self.members[k].as_ref()
    }

    pub fn is_goldfish(&self) -> bool {
        self.kind == FamilyKind::Goldfish
    }

    pub fn require_goldfish(&self, operation: &'static str) -> Result<()> {
        if self.is_goldfish() {
            Ok(())
        } else {
            Err(Error::UnsupportedFamily {
                operation,
                family: self.name.clone(),
            })
        }
    }

    /// Samples `phi(eta(p)) = p` and `eta'` against central differences.
    pub fn consistency(&self, domain: SampleDomain) -> (FamilyConsistency, Option<Error>) {
        Self::member_consistency(&self.members, domain)
    }

    /// [`EtaFamily::consistency`] for members not yet registered.
    pub fn member_consistency(members: &[Arc<dyn Eta>], domain: SampleDomain) -> (FamilyConsistency, Option<Error>) {
        let mut report = FamilyConsistency {
            inverse_residual: 0.0,
            derivative_residual: 0.0,
        };
        let mut first_failure = None;
        for (k, eta) in members.iter().enumerate() {
            for p in domain.grid(6) {
                let inv = (eta.inverse(eta.value(p)) - p).norm() / p.norm().max(1.0);
                report.inverse_residual = report.inverse_residual.max(inv);
                if inv > INVERSE_TOL && first_failure.is_none() {
                    first_failure = Some(Error::InconsistentFamily {
                        member: k,
                        check: "inverse",
                        point: p,
                        residual: inv,
                    });
                }
                let step = 1e-5 * p.norm().max(1.0);
                let fd = (eta.value(p + step) - eta.value(p - step)) / (2.0 * step);
                let d = eta.derivative(p);
                let der = (fd - d).norm() / d.norm().max(1.0);
                report.derivative_residual = report.derivative_residual.max(der);
                if der > DERIVATIVE_TOL && first_failure.is_none() {
                    first_failure = Some(Error::InconsistentFamily {
                        member: k,
                        check: "derivative",
                        point: p,
                        residual: der,
                    });
                }
            }
        }
        (report, first_failure)
    }

    pub fn verify(&self, domain: SampleDomain) -> Result<FamilyConsistency> {
        match self.consistency(domain) {
            (_, Some(err)) => Err(err),
            (report, None) => Ok(report),
        }
    }

    fn check_len(&self, state: &PhaseState) -> Result<()> {
        if state.n() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                found: state.n(),
            });
        }
        Ok(())
    }

    /// `eta_k(p_k)` for every k.
    pub fn node_values(&self, state: &PhaseState) -> Result<Vec<C64>> {
        self.check_len(state)?;
        Ok(self
            .members
            .iter()
            .zip(&state.p)
            .map(|(eta, &p)| eta.value(p))
            .collect())
    }
}

/// Closed set of built-in families addressable by name.
pub fn builtin_family(name: &str, n: usize) -> Result<EtaFamily> {
    if n == 0 {
        return Err(Error::InvalidInput("family needs N >= 1".into()));
    }
    match name.parse::<FamilyKind>()? {
        FamilyKind::Goldfish => Ok(EtaFamily::goldfish(n)),
        FamilyKind::Linear => Ok(EtaFamily::linear(n)),
        FamilyKind::Custom => Err(Error::UnknownFamily(name.to_string())),
    }
}

/// `H(z|p,q)`: degree `<= N-1` interpolant of `eta_k(p_k)` at `q_k`.
pub fn family_polynomial(fam: &EtaFamily, state: &PhaseState) -> Result<Polynomial> {
    let values = fam.node_values(state)?;
    let basis = LagrangeBasis::new(&state.q)?;
    Ok(basis.polynomial(&values))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservableSet {
    /// `h_1..h_N`, `h_1` the `z^(N-1)` coefficient.
    pub h: Vec<C64>,
    /// Signed elementary symmetric functions `e_1..e_N`.
    pub e: Vec<C64>,
    /// Total momentum.
    pub total_momentum: C64,
    /// Relative disagreement between the two routes used to compute `h`.
    pub route_discrepancy: f64,
}

impl ObservableSet {
    pub fn n(&self) -> usize {
        self.h.len()
    }

    /// `h_i` with `h_0 = 0` and `h_i = 0` for `i > N`.
    pub fn h_at(&self, i: usize) -> C64 {
        extended(&self.h, i, C64::new(0.0, 0.0))
    }

    /// `e_i` with `e_0 = -1` and `e_i = 0` for `i > N`.
    pub fn e_at(&self, i: usize) -> C64 {
        extended(&self.e, i, C64::new(-1.0, 0.0))
    }

    /// `(h_0, h_1, .., h_N)`.
    pub fn h_extended(&self) -> Vec<C64> {
        (0..=self.n()).map(|i| self.h_at(i)).collect()
    }

    /// `(e_0, e_1, .., e_N)`.
    pub fn e_extended(&self) -> Vec<C64> {
        (0..=self.n()).map(|i| self.e_at(i)).collect()
    }
}

pub(crate) fn extended(values: &[C64], i: usize, at_zero: C64) -> C64 {
    if i == 0 {
        at_zero
    } else {
        values.get(i - 1).copied().unwrap_or(C64::new(0.0, 0.0))
    }
}

/// `de_k/dq_r` for every k (rows) and r (columns), by deflating
/// `E_N(z|q)` by the linear factor `(z - q_r)`.
pub(crate) fn elementary_gradient_by_deflation(q: &[C64], e: &[C64]) -> Vec<Vec<C64>> {
    let n = q.len();
    let mut grad = vec![vec![C64::new(0.0, 0.0); n]; n];
    for (r, &qr) in q.iter().enumerate() {
        // unsigned sigma_j(q without r) = sigma_j(q) - q_r sigma_{j-1}(q without r)
        let mut prev = C64::new(1.0, 0.0);
        grad[0][r] = prev;
        for k in 1..n {
            let sigma_k = if k % 2 == 0 { -e[k - 1] } else { e[k - 1] };
            let next = sigma_k - qr * prev;
            grad[k][r] = if k % 2 == 0 { next } else { -next };
            prev = next;
        }
    }
    grad
}

/// Direct formula `h_k = sum_r eta_r(p_r) de_k/dq_r / prod_{l != r} (q_r - q_l)`.
fn h_direct(values: &[C64], q: &[C64], e: &[C64]) -> Vec<C64> {
    let grad = elementary_gradient_by_deflation(q, e);
    let n = q.len();
    let denoms: Vec<C64> = (0..n)
        .map(|r| {
            (0..n)
                .filter(|&l| l != r)
                .fold(C64::new(1.0, 0.0), |acc, l| acc * (q[r] - q[l]))
        })
        .collect();
    (0..n)
        .map(|k| (0..n).map(|r| values[r] * grad[k][r] / denoms[r]).sum())
        .collect()
}

fn relative_gap(a: &[C64], b: &[C64]) -> f64 {
    let scale = a.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let worst = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    tolerance::scaled(worst, scale)
}

fn observables_from_values(values: &[C64], state: &PhaseState) -> Result<ObservableSet> {
    let basis = LagrangeBasis::new(&state.q)?;
    let h = basis.coefficients(values);
    let e = elementary_sym(&state.q);
    let direct = h_direct(values, &state.q, &e);
    let route_discrepancy = relative_gap(&h, &direct);
    if route_discrepancy > tolerance::ROUTE_AGREEMENT {
        log::warn!("h coefficient routes disagree by {route_discrepancy:e}");
    }
    Ok(ObservableSet {
        h,
        e,
        total_momentum: state.p.iter().sum(),
        route_discrepancy,
    })
}

pub fn observables(fam: &EtaFamily, state: &PhaseState) -> Result<ObservableSet> {
    let values = fam.node_values(state)?;
    observables_from_values(&values, state)
}

/// Coefficients of the interpolant of `e^{p_k} + alpha q_k^N`; the `h`
/// field carries `h~_k`, cross-checked against `h_k + alpha e_k`.
pub fn deformed_tilde(fam: &EtaFamily, alpha: C64, state: &PhaseState) -> Result<ObservableSet> {
    fam.require_goldfish("deformed_tilde")?;
    let n = state.n();
    let mut values = fam.node_values(state)?;
    for (v, &q) in values.iter_mut().zip(&state.q) {
        *v += alpha * q.powu(n as u32);
    }
    let mut set = observables_from_values(&values, state)?;
    let plain = observables(fam, state)?;
    let combined: Vec<C64> = plain
        .h
        .iter()
        .zip(&plain.e)
        .map(|(&h, &e)| h + alpha * e)
        .collect();
    set.route_discrepancy = set.route_discrepancy.max(relative_gap(&set.h, &combined));
    Ok(set)
}

/// `sum_k lambda_k h_k + mu e_1`.
pub fn general_h(fam: &EtaFamily, lambda: &[C64], mu: C64, state: &PhaseState) -> Result<C64> {
    fam.require_goldfish("general_H")?;
    if lambda.len() != state.n() {
        return Err(Error::DimensionMismatch {
            expected: state.n(),
            found: lambda.len(),
        });
    }
    let obs = observables(fam, state)?;
    Ok(lambda.iter().zip(&obs.h).map(|(&l, &h)| l * h).sum::<C64>() + mu * obs.e[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn worked_state() -> PhaseState {
        PhaseState::new(vec![c(0.0, 0.0), c(2f64.ln(), 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap()
    }

    #[test]
    fn builtin_members() {
        let g = builtin_family("goldfish", 2).unwrap();
        assert_eq!(g.member(0).value(c(0.0, 0.0)), c(1.0, 0.0));
        assert!((g.member(0).inverse(c(2.0, 0.0)).re - std::f64::consts::LN_2).abs() < 1e-16);
        assert!((g.member(0).inverse(c(2.0, 0.0)).re - std::f64::consts::LN_2).abs() < 1e-16);
        let l = builtin_family("linear", 3).unwrap();
        assert_eq!(l.member(1).inverse(c(7.5, 0.0)), c(7.5, 0.0));
        assert!(matches!(builtin_family("toda", 2), Err(Error::UnknownFamily(_))));
    }

    #[test]
    fn builtins_pass_registration() {
        for fam in [EtaFamily::goldfish(3), EtaFamily::linear(3)] {
            let rep = fam.verify(SampleDomain::default()).unwrap();
            assert!(rep.inverse_residual < 1e-12);
            assert!(rep.derivative_residual < 1e-8);
        }
    }

    #[test]
    fn corrupted_inverse_rejected() {
        let bad: Arc<dyn Eta> = Arc::new(FnEta {
            value: |p: C64| p.exp(),
            derivative: |p: C64| p.exp(),
            inverse: |x: C64| x.ln() + 0.5,
        });
        let err = EtaFamily::custom("shifted", vec![bad], SampleDomain::default()).unwrap_err();
        assert!(matches!(err, Error::InconsistentFamily { check: "inverse", .. }));
        let bad_deriv: Arc<dyn Eta> = Arc::new(FnEta {
            value: |p: C64| p * p,
            derivative: |p: C64| p,
            inverse: |x: C64| x.sqrt(),
        });
        let domain = SampleDomain { re: [0.5, 2.0], im: [-0.5, 0.5] };
        let err = EtaFamily::custom("half", vec![bad_deriv], domain).unwrap_err();
        assert!(matches!(err, Error::InconsistentFamily { check: "derivative", .. }));
    }

    #[test]
    fn family_polynomial_examples() {
        let g = EtaFamily::goldfish(2);
        let s = PhaseState::new(vec![c(0.0, 0.0); 2], vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!(family_polynomial(&g, &s).unwrap().coeffs(), &[c(0.0, 0.0), c(1.0, 0.0)]);
        let p = family_polynomial(&g, &worked_state()).unwrap();
        // line through (0, 1) and (1, 2) solved by hand: slope 1, intercept 1
        assert!((p.coeffs()[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((p.coeffs()[1] - c(1.0, 0.0)).norm() < 1e-15);
        let l = EtaFamily::linear(3);
        let s = PhaseState::new(vec![c(3.0, 0.0); 3], vec![c(1.0, 0.0), c(2.0, 0.0), c(5.0, 0.0)]).unwrap();
        let p = family_polynomial(&l, &s).unwrap();
        for (a, b) in p.coeffs().iter().zip([0.0, 0.0, 3.0]) {
            assert!((a - c(b, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn observables_examples() {
        let obs = observables(&EtaFamily::goldfish(2), &worked_state()).unwrap();
        assert!((obs.h[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((obs.h[1] - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(obs.e, vec![c(1.0, 0.0), c(0.0, 0.0)]);
        assert!((obs.total_momentum - c(2f64.ln(), 0.0)).norm() < 1e-16);
        assert_eq!(obs.e_at(0), c(-1.0, 0.0));
        assert_eq!(obs.h_at(0), c(0.0, 0.0));
        assert_eq!(obs.h_at(3), c(0.0, 0.0));

        let s = PhaseState::new(vec![c(0.0, 0.0); 2], vec![c(1.0, 0.0), c(2.0, 0.0)]).unwrap();
        let obs = observables(&EtaFamily::linear(2), &s).unwrap();
        assert_eq!(obs.h, vec![c(0.0, 0.0); 2]);

        let s = PhaseState::new(vec![c(0.3, -0.4)], vec![c(1.7, 0.2)]).unwrap();
        let obs = observables(&EtaFamily::goldfish(1), &s).unwrap();
        assert!((obs.h[0] - c(0.3, -0.4).exp()).norm() < 1e-15);
    }

    #[test]
    fn tilde_examples() {
        let g = EtaFamily::goldfish(2);
        let s = worked_state();
        let plain = observables(&g, &s).unwrap();
        let zero = deformed_tilde(&g, c(0.0, 0.0), &s).unwrap();
        assert_eq!(zero.h, plain.h);
        let one = deformed_tilde(&g, c(1.0, 0.0), &s).unwrap();
        assert!((one.h[0] - c(2.0, 0.0)).norm() < 1e-14);
        assert!((one.h[0] - (plain.h[0] + plain.e[0])).norm() < 1e-14);
        let i = deformed_tilde(&g, c(0.0, 1.0), &s).unwrap();
        for k in 0..2 {
            assert!((i.h[k].im - (c(0.0, 1.0) * plain.e[k]).im).abs() < 1e-14);
        }
        assert!(matches!(
            deformed_tilde(&EtaFamily::linear(2), c(1.0, 0.0), &s),
            Err(Error::UnsupportedFamily { .. })
        ));
    }

    #[test]
    fn general_h_examples() {
        let g = EtaFamily::goldfish(2);
        let s = worked_state();
        let obs = observables(&g, &s).unwrap();
        let v = general_h(&g, &[c(1.0, 0.0), c(0.0, 0.0)], c(0.0, 0.0), &s).unwrap();
        assert_eq!(v, obs.h[0]);
        let v = general_h(&g, &[c(0.0, 0.0); 2], c(1.0, 0.0), &s).unwrap();
        assert_eq!(v, c(1.0, 0.0));
        let v = general_h(&g, &[c(0.0, 0.0), c(1.0, 0.0)], c(2.0, 0.0), &s).unwrap();
        assert!((v - c(3.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn state_validation() {
        assert!(matches!(
            PhaseState::new(vec![c(0.0, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            PhaseState::new(vec![c(0.0, 0.0); 2], vec![c(1.0, 0.0); 2]),
            Err(Error::DegenerateConfiguration { .. })
        ));
    }
}
