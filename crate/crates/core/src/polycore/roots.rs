// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

//! Polynomial zeros from the eigenvalues of a balanced companion matrix.

use nalgebra::DMatrix;
use serde::Serialize;

use super::poly::{monic_from_roots, Polynomial};
use crate::error::{Error, Result};
use crate::tolerance;
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootSet {
    pub roots: Vec<C64>,
}

impl RootSet {
    pub fn new(roots: Vec<C64>) -> Self {
        Self { roots }
    }

    pub fn len(&self) -> usize {
        self.roots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.roots.is_empty()
    }
}

/// Coefficient-wise residual between `prod (z - r)` and the monic rescaling of `poly`.
pub fn reconstruction_residual(poly: &Polynomial, roots: &[C64]) -> f64 {
    let lead = poly.leading();
    let rebuilt = monic_from_roots(roots);
    poly.coeffs()
        .iter()
        .zip(rebuilt.coeffs())
        .map(|(&c, &r)| {
            let target = c / lead;
            (target - r).norm() / target.norm().max(1.0)
        })
        .fold(0.0, f64::max)
}

pub fn roots(poly: &Polynomial) -> Result<RootSet> {
    let lead = poly.leading();
    if lead.norm() == 0.0 {
        return Err(Error::ZeroLeadingCoefficient);
    }
    let d = poly.degree();
    if d == 0 {
        return Ok(RootSet::new(Vec::new()));
    }
    let monic: Vec<C64> = poly.coeffs().iter().map(|&c| c / lead).collect();
    let mut found = if d == 1 {
        vec![-monic[1]]
    } else {
        companion_eigenvalues(&monic)?
    };
    for r in found.iter_mut() {
        *r = polish(poly, *r);
    }
    let residual = reconstruction_residual(poly, &found);
    if residual > tolerance::ROOT_RECONSTRUCTION {
        return Err(Error::RootAccuracy {
            residual,
            tolerance: tolerance::ROOT_RECONSTRUCTION,
        });
    }
    Ok(RootSet::new(found))
}

fn companion_eigenvalues(monic: &[C64]) -> Result<Vec<C64>> {
    let d = monic.len() - 1;
    let mut m = DMatrix::<C64>::zeros(d, d);
    for j in 0..d {
        m[(0, j)] = -monic[j + 1];
    }
    for i in 1..d {
        m[(i, i - 1)] = C64::new(1.0, 0.0);
    }
    balance(&mut m);
    let schur = nalgebra::linalg::Schur::try_new(m, f64::EPSILON, 10_000).ok_or(
        Error::RootAccuracy {
            residual: f64::INFINITY,
            tolerance: tolerance::ROOT_RECONSTRUCTION,
        },
    )?;
    let (_, t) = schur.unpack();
    Ok((0..d).map(|i| t[(i, i)]).collect())
}

/// Parlett-Reinsch diagonal similarity, radix 2, so row and column norms
/// of the companion matrix are comparable before the QR iteration.
fn balance(m: &mut DMatrix<C64>) {
    let n = m.nrows();
    let radix = 2.0_f64;
    let mut converged = false;
    while !converged {
        converged = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].norm();
                    r += m[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= radix * radix;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= radix * radix;
            }
            if (c + r) / f < 0.95 * s {
                converged = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// A few Newton steps on the original polynomial; a step is kept only if
/// it reduces `|p(r)|`.
fn polish(poly: &Polynomial, mut r: C64) -> C64 {
    let mut best = poly.evaluate(r).norm();
    for _ in 0..3 {
        let (v, dv) = poly.evaluate_with_derivative(r);
        if dv.norm() == 0.0 || v.norm() == 0.0 {
            break;
        }
        let candidate = r - v / dv;
        let val = poly.evaluate(candidate).norm();
        if val < best {
            best = val;
            r = candidate;
        } else {
            break;
        }
    }
    r
}
