// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

use serde::Serialize;

use super::poly::Polynomial;
use crate::error::{Error, Result};
use crate::tolerance;
use crate::C64;

/// Interpolation data: `N` pairwise-distinct nodes and the values prescribed there.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeValueSet {
    pub nodes: Vec<C64>,
    pub values: Vec<C64>,
}

impl NodeValueSet {
    pub fn new(nodes: Vec<C64>, values: Vec<C64>) -> Result<Self> {
        if nodes.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: nodes.len(),
                found: values.len(),
            });
        }
        if nodes.is_empty() {
            return Err(Error::InvalidInput("empty node set".into()));
        }
        Ok(Self { nodes, values })
    }
}

/// Smallest pairwise distance, `+inf` for fewer than two nodes.
pub fn min_separation(nodes: &[C64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            best = best.min((nodes[i] - nodes[j]).norm());
        }
    }
    best
}

pub fn check_separation(nodes: &[C64]) -> Result<f64> {
    let sep = min_separation(nodes);
    let floor = tolerance::separation_floor(nodes);
    if nodes.len() > 1 && !(sep >= floor) {
        return Err(Error::DegenerateConfiguration {
            min_separation: sep,
            tolerance: floor,
        });
    }
    Ok(sep)
}

/// First-form Lagrange basis over a fixed node set.
///
/// `basis[k]` holds the monomial coefficients (leading first, length `N`) of
/// `l_k(z) = prod_{m != k} (z - q_m) / (q_k - q_m)`. The barycentric weights
/// `w_k = 1 / prod_{m != k} (q_k - q_m)` give O(N) evaluation off the nodes.
#[derive(Debug, Clone)]
pub struct LagrangeBasis {
    nodes: Vec<C64>,
    weights: Vec<C64>,
    basis: Vec<Vec<C64>>,
}

impl LagrangeBasis {
    pub fn new(nodes: &[C64]) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::InvalidInput("empty node set".into()));
        }
        check_separation(nodes)?;
        let n = nodes.len();
        let mut weights = Vec::with_capacity(n);
        let mut basis = Vec::with_capacity(n);
        for k in 0..n {
            let mut numer = vec![C64::new(1.0, 0.0)];
            let mut denom = C64::new(1.0, 0.0);
            for (m, &qm) in nodes.iter().enumerate() {
                if m == k {
                    continue;
                }
                numer.push(C64::new(0.0, 0.0));
                for i in (1..numer.len()).rev() {
                    let prev = numer[i - 1];
                    numer[i] -= qm * prev;
                }
                denom *= nodes[k] - qm;
            }
            let w = denom.inv();
            weights.push(w);
            basis.push(numer.into_iter().map(|c| c * w).collect());
        }
        Ok(Self {
            nodes: nodes.to_vec(),
            weights,
            basis,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[C64] {
        &self.nodes
    }

    /// `1 / prod_{m != k} (q_k - q_m)`.
    pub fn weights(&self) -> &[C64] {
        &self.weights
    }

    /// Coefficients of `l_k`, leading first.
    pub fn basis(&self, k: usize) -> &[C64] {
        &self.basis[k]
    }

    /// Coefficients of `sum_k values_k l_k(z)`.
    pub fn coefficients(&self, values: &[C64]) -> Vec<C64> {
        let n = self.len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (k, &v) in values.iter().enumerate() {
            for (o, &b) in out.iter_mut().zip(&self.basis[k]) {
                *o += v * b;
            }
        }
        out
    }

    pub fn polynomial(&self, values: &[C64]) -> Polynomial {
        Polynomial::new(self.coefficients(values))
    }

    /// Barycentric (second form) evaluation of the interpolant at `z`.
    pub fn evaluate(&self, values: &[C64], z: C64) -> C64 {
        let mut num = C64::new(0.0, 0.0);
        let mut den = C64::new(0.0, 0.0);
        for ((&q, &w), &v) in self.nodes.iter().zip(&self.weights).zip(values) {
            let d = z - q;
            if d.norm() == 0.0 {
                return v;
            }
            let t = w / d;
            num += t * v;
            den += t;
        }
        num / den
    }
}

/// Unique polynomial of degree `<= N-1` through the node/value pairs.
/// The result always carries exactly `N` coefficients.
pub fn interpolate(data: &NodeValueSet) -> Result<Polynomial> {
    let basis = LagrangeBasis::new(&data.nodes)?;
    Ok(basis.polynomial(&data.values))
}

/// Max node residual `|P(q_k) - v_k|` relative to `max(1, max |v_k|)`.
pub fn interpolation_residual(poly: &Polynomial, data: &NodeValueSet) -> f64 {
    let scale = data.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let worst = data
        .nodes
        .iter()
        .zip(&data.values)
        .map(|(&q, &v)| (poly.evaluate(q) - v).norm())
        .fold(0.0, f64::max);
    tolerance::scaled(worst, scale)
}
