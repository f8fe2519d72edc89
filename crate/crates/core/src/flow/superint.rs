// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::hamfam::{observables, EtaFamily, PhaseState};
use crate::linalg::{expm_apply, numerical_rank, RankReport};
use crate::poisson::{build_a, AnalyticContext, Observable};
use crate::tolerance;
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct Superintegrals {
    pub k: usize,
    /// `lambda[k][l] = e_{k+1} h_{l+1} - e_{l+1} h_{k+1}`.
    pub lambda: Vec<Vec<C64>>,
    /// `(Phi_0..Phi_N)`, or why it is unavailable for this `k`.
    pub phi: std::result::Result<Vec<C64>, Error>,
}

/// Conserved quantities of the `h_k` flow. `Phi = exp(-tau A^(k)) e` with
/// `tau = P / ((N-k+1) h_{k-1})`, which advances like time; it needs
/// `h_{k-1} != 0`, so it never exists for `k = 1`.
pub fn superintegrals(k: usize, fam: &EtaFamily, state: &PhaseState) -> Result<Superintegrals> {
    fam.require_goldfish("superintegrals")?;
    let n = state.n();
    if k == 0 || k > n {
        return Err(Error::IndexOutOfRange { index: k, n });
    }
    let obs = observables(fam, state)?;
    let lambda = (0..n)
        .map(|a| {
            (0..n)
                .map(|b| obs.e[a] * obs.h[b] - obs.e[b] * obs.h[a])
                .collect()
        })
        .collect();
    let h_ext = obs.h_extended();
    let denom = h_ext[k - 1] * (n - k + 1) as f64;
    let phi = if denom.norm() == 0.0 {
        Err(Error::ZeroDenominator { index: k - 1 })
    } else {
        let tau = obs.total_momentum / denom;
        let a = build_a(k, &h_ext)?;
        // exp(-tau A) with complex tau: scale the matrix, step unit time
        Ok(expm_apply(&(a.entries * -tau), 1.0, &obs.e_extended()))
    };
    Ok(Superintegrals { k, lambda, phi })
}

/// Rank of the Jacobian of `(h_1..h_N, Lambda_{1,2}..Lambda_{1,N})` with
/// respect to `(p, q)`; functional independence means rank `2N - 1`.
pub fn jacobian_rank(fam: &EtaFamily, state: &PhaseState) -> Result<RankReport> {
    fam.require_goldfish("jacobian_rank")?;
    let n = state.n();
    let ctx = AnalyticContext::new(fam, state)?;
    let mut funcs: Vec<Observable> = (1..=n).map(Observable::H).collect();
    funcs.extend((2..=n).map(|l| Observable::Lambda(1, l)));
    let mut jac = DMatrix::<C64>::zeros(funcs.len(), 2 * n);
    for (row, f) in funcs.iter().enumerate() {
        let (_, g) = ctx.evaluate(f)?;
        for (col, v) in g.dp.iter().chain(&g.dq).enumerate() {
            jac[(row, col)] = *v;
        }
    }
    Ok(numerical_rank(&jac, tolerance::RANK_REL))
}
