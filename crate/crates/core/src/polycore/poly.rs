// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;
use serde::Serialize;

use crate::C64;

/// Dense complex polynomial, coefficients stored leading-first:
/// `coeffs[0] z^d + ... + coeffs[d]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polynomial {
    coeffs: Vec<C64>,
}

impl Polynomial {
    /// Panics on an empty coefficient vector; use [`Polynomial::zero`] instead.
    pub fn new(coeffs: Vec<C64>) -> Self {
        assert!(!coeffs.is_empty(), "polynomial needs at least one coefficient");
        Self { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn constant(c: C64) -> Self {
        Self { coeffs: vec![c] }
    }

    pub fn zero() -> Self {
        Self::constant(C64::new(0.0, 0.0))
    }

    pub fn coeffs(&self) -> &[C64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<C64> {
        self.coeffs
    }

    /// Nominal degree, `len(coeffs) - 1`, including leading zeros.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn leading(&self) -> C64 {
        self.coeffs[0]
    }

    /// Horner evaluation.
    pub fn evaluate(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn evaluate_with_derivative(&self, z: C64) -> (C64, C64) {
        let zero = C64::new(0.0, 0.0);
        self.coeffs.iter().fold((zero, zero), |(v, d), &c| (v * z + c, d * z + v))
    }

    pub fn derivative(&self) -> Polynomial {
        let d = self.degree();
        if d == 0 {
            return Polynomial::zero();
        }
        let coeffs = self.coeffs[..d]
            .iter()
            .enumerate()
            .map(|(i, &c)| c * (d - i) as f64)
            .collect();
        Polynomial { coeffs }
    }

    /// Drops leading coefficients with `|c| <= tol`, keeping at least one.
    pub fn trimmed(&self, tol: f64) -> Polynomial {
        let first = self
            .coeffs
            .iter()
            .position(|c| c.norm() > tol)
            .unwrap_or(self.coeffs.len() - 1);
        Polynomial {
            coeffs: self.coeffs[first..].to_vec(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = vec![C64::new(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial { coeffs: out }
    }

    pub fn scale(&self, s: C64) -> Polynomial {
        Polynomial {
            coeffs: self.coeffs.iter().map(|&c| c * s).collect(),
        }
    }

    /// Largest coefficient modulus.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// `E_N(z|q) = prod_k (z - q_k)`, built by repeated multiplication by linear factors.
pub fn monic_from_roots(q: &[C64]) -> Polynomial {
    let mut coeffs = Vec::with_capacity(q.len() + 1);
    coeffs.push(C64::new(1.0, 0.0));
    for &root in q {
        coeffs.push(C64::new(0.0, 0.0));
        for i in (1..coeffs.len()).rev() {
            let prev = coeffs[i - 1];
            coeffs[i] -= root * prev;
        }
    }
    Polynomial { coeffs }
}

/// Signed elementary symmetric functions `e_1..e_N` with
/// `e_k = (-1)^(k-1) sum_{r_1<..<r_k} q_{r_1}..q_{r_k}`, i.e. the
/// coefficients of `z^N - E_N(z|q)` below the leading power.
pub fn elementary_sym(q: &[C64]) -> Vec<C64> {
    monic_from_roots(q).coeffs[1..].iter().map(|&c| -c).collect()
}

/// Same quantities via Newton's identities from the power sums.
///
/// Numerically weaker than [`elementary_sym`] for large `N` or widely spread
/// roots; kept as an independent cross-check.
pub fn elementary_sym_newton(q: &[C64]) -> Vec<C64> {
    let n = q.len();
    let power_sums: Vec<C64> = (1..=n)
        .map(|k| q.iter().map(|&x| x.powu(k as u32)).sum())
        .collect();
    // sigma_k (unsigned): k sigma_k = sum_{i=1..k} (-1)^(i-1) sigma_{k-i} p_i
    let mut sigma = vec![C64::new(1.0, 0.0)];
    for k in 1..=n {
        let mut acc = C64::new(0.0, 0.0);
        for i in 1..=k {
            let term = sigma[k - i] * power_sums[i - 1];
            if i % 2 == 1 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        sigma.push(acc / k as f64);
    }
    sigma[1..]
        .iter()
        .enumerate()
        .map(|(i, &s)| if i % 2 == 0 { s } else { -s })
        .collect()
}
