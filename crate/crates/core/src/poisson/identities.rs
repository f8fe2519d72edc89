// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

//! Residual evaluators for the structural bracket identities. Every
//! residual is scaled by `max(1, largest term)`.

use serde::Serialize;

use super::gradient::{
    bracket_of, coefficient_jet, finite_difference_gradient, AnalyticContext, BracketRoute,
    NodeValues, Observable,
};
use super::structure::closure_rhs;
use crate::error::{Error, Result};
use crate::hamfam::{EtaFamily, PhaseState};
use crate::polycore::LagrangeBasis;
use crate::tolerance::scaled;
use crate::C64;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Table `{a_r, b_s}` for two polynomial families together with the
/// node-pair check of the basic bracket formula
/// `C(q_k, q_l) = {alpha_k, beta_l} + A'(q_k) d beta_l/d p_k - B'(q_l) d alpha_k/d p_l`.
#[derive(Debug, Clone, Serialize)]
pub struct CoefficientBracketTable {
    pub table: Vec<Vec<C64>>,
    pub basic_residual: f64,
}

pub fn coefficient_bracket_poly(
    a: &dyn NodeValues,
    b: &dyn NodeValues,
    state: &PhaseState,
) -> Result<CoefficientBracketTable> {
    let n = state.n();
    let basis = LagrangeBasis::new(&state.q)?;
    let ja = coefficient_jet(a, state, &basis)?;
    let jb = coefficient_jet(b, state, &basis)?;
    let table: Vec<Vec<C64>> = (0..n)
        .map(|r| (0..n).map(|s| bracket_of(&ja.grads[r], &jb.grads[s]).0).collect())
        .collect();

    let mut worst = 0.0_f64;
    for k in 0..n {
        for l in 0..n {
            let mut lhs = zero();
            let mut lhs_scale = 0.0_f64;
            for (r, row) in table.iter().enumerate() {
                let zr = state.q[k].powu((n - 1 - r) as u32);
                for (s, &t) in row.iter().enumerate() {
                    let term = t * zr * state.q[l].powu((n - 1 - s) as u32);
                    lhs += term;
                    lhs_scale = lhs_scale.max(term.norm());
                }
            }
            // {alpha_k, beta_l}
            let mut node_bracket = zero();
            let mut scale = lhs_scale;
            for j in 0..n {
                let t1 = ja.node.dp[k][j] * jb.node.dq[l][j];
                let t2 = ja.node.dq[k][j] * jb.node.dp[l][j];
                node_bracket += t1 - t2;
                scale = scale.max(t1.norm()).max(t2.norm());
            }
            let second = ja.node_slopes[k] * jb.node.dp[l][k];
            let third = jb.node_slopes[l] * ja.node.dp[k][l];
            scale = scale.max(second.norm()).max(third.norm());
            let rhs = node_bracket + second - third;
            worst = worst.max(scaled((lhs - rhs).norm(), scale));
        }
    }
    Ok(CoefficientBracketTable {
        table,
        basic_residual: worst,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RBracketReport {
    /// Node-pair comparison of `R(q_k, q_l) = {H(w), E(z)}` with
    /// `e^{p_k} delta_kl prod_{r != k} (q_k - q_r)`.
    pub node_residual: f64,
    /// `{h_k, e_l} - {h_l, e_k}` over all pairs.
    pub symmetry_residual: f64,
}

impl RBracketReport {
    pub fn max_residual(&self) -> f64 {
        self.node_residual.max(self.symmetry_residual)
    }
}

/// `B[k][l] = {h_{k+1}, e_{l+1}}` and the per-entry term scale.
fn he_table(ctx: &AnalyticContext<'_>, n: usize) -> (Vec<Vec<C64>>, Vec<Vec<f64>>) {
    let mut vals = vec![vec![zero(); n]; n];
    let mut scales = vec![vec![0.0; n]; n];
    for k in 0..n {
        for l in 0..n {
            let (v, s) = bracket_of(&ctx.h_jet().grads[k], &ctx.e_jet().grads[l]);
            vals[k][l] = v;
            scales[k][l] = s;
        }
    }
    (vals, scales)
}

pub fn r_bracket_check(fam: &EtaFamily, state: &PhaseState) -> Result<RBracketReport> {
    fam.require_goldfish("r_bracket_check")?;
    let n = state.n();
    let ctx = AnalyticContext::new(fam, state)?;
    let (b, scales) = he_table(&ctx, n);
    let mut node_residual = 0.0_f64;
    for k in 0..n {
        for l in 0..n {
            // R(z, w) = sum_{r,s} {h_r, e_s} w^{N-r} z^{N-s}, z = q_k, w = q_l
            let mut r_val = zero();
            let mut scale = 0.0_f64;
            for (r, row) in b.iter().enumerate() {
                let wr = state.q[l].powu((n - 1 - r) as u32);
                for (s, &v) in row.iter().enumerate() {
                    let term = v * wr * state.q[k].powu((n - 1 - s) as u32);
                    r_val += term;
                    scale = scale.max(term.norm());
                }
            }
            let expected = if k == l {
                (0..n)
                    .filter(|&r| r != k)
                    .fold(state.p[k].exp(), |acc, r| acc * (state.q[k] - state.q[r]))
            } else {
                zero()
            };
            scale = scale.max(expected.norm());
            node_residual = node_residual.max(scaled((r_val - expected).norm(), scale));
        }
    }
    let mut symmetry_residual = 0.0_f64;
    for k in 0..n {
        for l in 0..n {
            let scale = scales[k][l].max(scales[l][k]);
            symmetry_residual = symmetry_residual.max(scaled((b[k][l] - b[l][k]).norm(), scale));
        }
    }
    Ok(RBracketReport {
        node_residual,
        symmetry_residual,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClosureResidual {
    /// Closed-form bilinear expansion of `{h_k, e_l}`; absent unless `k, l >= 1`.
    pub closed_form: Option<f64>,
    /// `e_k h_l - e_l h_k + {h_{k+1}, e_l} - {h_k, e_{l+1}}`; absent unless `k, l <= N-1`.
    pub recursion: Option<f64>,
}

/// Checks the closure relation and the recursion at one index pair
/// (`0 <= k, l <= N`) with brackets from `route`.
pub fn closure_identity_check(
    k: usize,
    l: usize,
    fam: &EtaFamily,
    state: &PhaseState,
    route: BracketRoute,
) -> Result<ClosureResidual> {
    fam.require_goldfish("closure_identity_check")?;
    let n = state.n();
    for i in [k, l] {
        if i > n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
    }
    let ctx = AnalyticContext::new(fam, state)?;
    let set = crate::hamfam::observables(fam, state)?;
    let h_ext = set.h_extended();
    let e_ext = set.e_extended();

    let mut cache = std::collections::HashMap::new();
    // extended bracket: {h_0, .} = 0 and {., e_0} = 0
    let mut he = |a: usize, b: usize| -> Result<(C64, f64)> {
        if a == 0 || b == 0 {
            return Ok((zero(), 0.0));
        }
        if let Some(v) = cache.get(&(a, b)) {
            return Ok(*v);
        }
        let v = match route {
            BracketRoute::Analytic => bracket_of(&ctx.h_jet().grads[a - 1], &ctx.e_jet().grads[b - 1]),
            BracketRoute::FiniteDiff => {
                let gh = finite_difference_gradient(
                    |s| super::gradient::observable_value(&Observable::H(a), fam, s),
                    state,
                )?;
                let ge = finite_difference_gradient(
                    |s| super::gradient::observable_value(&Observable::E(b), fam, s),
                    state,
                )?;
                bracket_of(&gh, &ge)
            }
        };
        cache.insert((a, b), v);
        Ok(v)
    };

    let closed_form = if k >= 1 && l >= 1 {
        let (lhs, s) = he(k, l)?;
        let rhs = closure_rhs(k, l, &h_ext, &e_ext)?;
        let scale = s.max(rhs.norm()).max(max_product(&h_ext, &e_ext));
        Some(scaled((lhs - rhs).norm(), scale))
    } else {
        None
    };
    let recursion = if k < n && l < n {
        let (b1, s1) = he(k + 1, l)?;
        let (b2, s2) = he(k, l + 1)?;
        let p1 = e_ext[k] * h_ext[l];
        let p2 = e_ext[l] * h_ext[k];
        let res = p1 - p2 + b1 - b2;
        let scale = s1.max(s2).max(p1.norm()).max(p2.norm());
        Some(scaled(res.norm(), scale))
    } else {
        None
    };
    Ok(ClosureResidual {
        closed_form,
        recursion,
    })
}

fn max_product(h_ext: &[C64], e_ext: &[C64]) -> f64 {
    let hm = h_ext.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let em = e_ext.iter().map(|x| x.norm()).fold(0.0, f64::max);
    hm * em
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TranslationResidual {
    /// `{h_k, P} - (N-k+1) h_{k-1}`.
    pub bracket_residual: f64,
    /// `{h_k, {h_k, P}}`, inner bracket analytic, its gradient by finite
    /// differences; scaled by the inner bracket's largest term.
    pub double_bracket_residual: f64,
}

pub fn translation_check(k: usize, fam: &EtaFamily, state: &PhaseState) -> Result<TranslationResidual> {
    let n = state.n();
    if k == 0 || k > n {
        return Err(Error::IndexOutOfRange { index: k, n });
    }
    let ctx = AnalyticContext::new(fam, state)?;
    let (_, gh) = ctx.evaluate(&Observable::H(k))?;
    let (_, gp) = ctx.evaluate(&Observable::TotalMomentum)?;
    let (val, scale) = bracket_of(&gh, &gp);
    let expected = if k == 1 {
        zero()
    } else {
        ctx.h_jet().values[k - 2] * (n - k + 1) as f64
    };
    let bracket_residual = scaled((val - expected).norm(), scale.max(expected.norm()));

    // differencing a cancelling sum loses accuracy in proportion to its
    // largest term, so that term enters the scale
    let inner_terms = std::cell::Cell::new(0.0_f64);
    let inner = |s: &PhaseState| -> Result<C64> {
        let c = AnalyticContext::new(fam, s)?;
        let (_, a) = c.evaluate(&Observable::H(k))?;
        let (_, b) = c.evaluate(&Observable::TotalMomentum)?;
        let (v, terms) = bracket_of(&a, &b);
        inner_terms.set(inner_terms.get().max(terms));
        Ok(v)
    };
    let g_inner = finite_difference_gradient(inner, state)?;
    let (dbl, dscale) = bracket_of(&gh, &g_inner);
    let gh_max = gh.dp.iter().chain(&gh.dq).map(|x| x.norm()).fold(0.0, f64::max);
    Ok(TranslationResidual {
        bracket_residual,
        double_bracket_residual: scaled(dbl.norm(), dscale.max(gh_max * inner_terms.get())),
    })
}
