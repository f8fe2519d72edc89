// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

//! Bilinear closure of `{h_k, e_j}` for the goldfish family and the
//! structure matrices driving the linear flows of `(e_0, .., e_N)`.
//!
//! Unrolling the recursion
//! `e_k h_l - e_l h_k + {h_{k+1}, e_l} - {h_k, e_{l+1}} = 0`
//! from `{h_0, .} = 0` gives, for `1 <= k, j <= N`,
//!
//! ```text
//! {h_k, e_j} = sum_{m=j}^{k+j-1} ( e_m h_{k+j-1-m} - e_{k+j-1-m} h_m )
//! ```
//!
//! with `e_0 = -1`, `h_0 = 0` and `e_m = h_m = 0` for `m > N`. The
//! `m = k+j-1` term contributes `+h_{k+j-1}`, so `{h_1, e_j} = h_j`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::tolerance;
use crate::C64;

/// One term `coef * e_{e_index} * h_{h_index}` of a closure expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ClosureTerm {
    pub coef: i32,
    pub e_index: usize,
    pub h_index: usize,
}

fn check_index(i: usize, lo: usize, n: usize) -> Result<()> {
    if i < lo || i > n {
        Err(Error::IndexOutOfRange { index: i, n })
    } else {
        Ok(())
    }
}

/// Integer expansion of `{h_k, e_j}` over products `e_l h_m`, with terms
/// that vanish identically (`h_0`, indices beyond `N`) dropped and equal
/// monomials merged.
pub fn closure_terms(k: usize, j: usize, n: usize) -> Result<Vec<ClosureTerm>> {
    check_index(k, 1, n)?;
    check_index(j, 1, n)?;
    let mut terms: Vec<ClosureTerm> = Vec::new();
    let mut push = |coef: i32, e_index: usize, h_index: usize| {
        if h_index == 0 || h_index > n || e_index > n {
            return;
        }
        match terms
            .iter_mut()
            .find(|t| t.e_index == e_index && t.h_index == h_index)
        {
            Some(t) => t.coef += coef,
            None => terms.push(ClosureTerm {
                coef,
                e_index,
                h_index,
            }),
        }
    };
    for m in j..=k + j - 1 {
        let other = k + j - 1 - m;
        push(1, m, other);
        push(-1, other, m);
    }
    terms.retain(|t| t.coef != 0);
    terms.sort_by_key(|t| (t.e_index, t.h_index));
    Ok(terms)
}

/// Evaluates a closure expansion with extended `h`, `e` vectors (index 0..=N).
pub fn evaluate_terms(terms: &[ClosureTerm], h_ext: &[C64], e_ext: &[C64]) -> C64 {
    terms
        .iter()
        .map(|t| e_ext[t.e_index] * h_ext[t.h_index] * t.coef as f64)
        .sum()
}

/// Right-hand side of the closure relation for `{h_k, e_j}`.
pub fn closure_rhs(k: usize, j: usize, h_ext: &[C64], e_ext: &[C64]) -> Result<C64> {
    let n = h_ext.len() - 1;
    Ok(evaluate_terms(&closure_terms(k, j, n)?, h_ext, e_ext))
}

/// `entries[j][l]` lists `(coef, m)` pairs so that `A_{j,l} = sum coef * h_m`.
pub type StructureTable = Vec<Vec<Vec<(i32, usize)>>>;

/// Symbolic form of `A^(k)` over the extended index range `0..=N`.
pub fn structure_table(k: usize, n: usize) -> Result<StructureTable> {
    check_index(k, 1, n)?;
    let mut table = vec![vec![Vec::new(); n + 1]; n + 1];
    for j in 1..=n {
        for t in closure_terms(k, j, n)? {
            table[j][t.e_index].push((t.coef, t.h_index));
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureMatrix {
    pub k: usize,
    #[serde(serialize_with = "serialize_matrix")]
    pub entries: DMatrix<C64>,
}

fn serialize_matrix<S: serde::Serializer>(
    m: &DMatrix<C64>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(m.nrows()))?;
    for i in 0..m.nrows() {
        let row: Vec<C64> = m.row(i).iter().copied().collect();
        seq.serialize_element(&row)?;
    }
    seq.end()
}

impl StructureMatrix {
    /// Largest entry modulus.
    pub fn scale(&self) -> f64 {
        self.entries.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn apply(&self, e_ext: &[C64]) -> Vec<C64> {
        let v = nalgebra::DVector::from_column_slice(e_ext);
        (&self.entries * v).iter().copied().collect()
    }
}

/// `A^(k)(h)` such that `de/dt = A^(k) e` on `(e_0, .., e_N)` under the
/// flow of `h_k`, with `h` frozen. `h_ext[0]` must be the `h_0 = 0` entry.
pub fn build_a(k: usize, h_ext: &[C64]) -> Result<StructureMatrix> {
    if h_ext.is_empty() {
        return Err(Error::InvalidInput("h vector must include h_0".into()));
    }
    if h_ext[0] != C64::new(0.0, 0.0) {
        return Err(Error::InvalidInput("extended h vector needs h_0 = 0".into()));
    }
    let n = h_ext.len() - 1;
    let table = structure_table(k, n)?;
    let entries = DMatrix::from_fn(n + 1, n + 1, |j, l| {
        table[j][l]
            .iter()
            .map(|&(coef, m)| h_ext[m] * coef as f64)
            .sum()
    });
    Ok(StructureMatrix { k, entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommutatorCheck {
    pub norm: f64,
    pub scale: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// `max |[A, B]|` against `COMMUTATOR * scale^2`, `scale` the largest entry
/// of either matrix.
pub fn commutator_check(a: &StructureMatrix, b: &StructureMatrix) -> CommutatorCheck {
    let comm = &a.entries * &b.entries - &b.entries * &a.entries;
    let norm = comm.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let scale = a.scale().max(b.scale());
    let tol = tolerance::COMMUTATOR * scale * scale;
    CommutatorCheck {
        norm,
        scale,
        tolerance: tol,
        passed: norm <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn identity_terms() {
        // {h_1, e_j} = h_j, i.e. -e_0 h_j
        for n in 1..6 {
            for j in 1..=n {
                assert_eq!(
                    closure_terms(1, j, n).unwrap(),
                    vec![ClosureTerm {
                        coef: -1,
                        e_index: 0,
                        h_index: j
                    }]
                );
            }
        }
    }

    #[test]
    fn two_two_expansion() {
        // {h_2, e_2} = e_2 h_1 - e_1 h_2 + h_3
        let terms = closure_terms(2, 2, 4).unwrap();
        assert_eq!(
            terms,
            vec![
                ClosureTerm { coef: -1, e_index: 0, h_index: 3 },
                ClosureTerm { coef: -1, e_index: 1, h_index: 2 },
                ClosureTerm { coef: 1, e_index: 2, h_index: 1 },
            ]
        );
    }

    #[test]
    fn symmetric_in_k_and_j() {
        for n in 1..7 {
            for k in 1..=n {
                for j in 1..=n {
                    assert_eq!(closure_terms(k, j, n).unwrap(), closure_terms(j, k, n).unwrap());
                }
            }
        }
    }

    #[test]
    fn first_matrix_has_minus_h_in_column_zero() {
        let h = vec![c(0.0), c(1.5), c(-0.25), c(2.0)];
        let a = build_a(1, &h).unwrap();
        for j in 0..4 {
            for l in 0..4 {
                let expect = if l == 0 && j > 0 { -h[j] } else { c(0.0) };
                assert_eq!(a.entries[(j, l)], expect);
            }
        }
    }

    #[test]
    fn row_zero_vanishes() {
        let h = vec![c(0.0), c(0.3), c(-1.2), c(0.7), c(2.2)];
        for k in 1..=4 {
            let a = build_a(k, &h).unwrap();
            assert!(a.entries.row(0).iter().all(|x| *x == c(0.0)));
        }
    }

    #[test]
    fn commutators_vanish_for_random_h() {
        let h5: Vec<C64> = [0.0, 0.7, -1.3, 0.4, 2.1, -0.6]
            .iter()
            .zip([0.0, 0.2, 0.5, -0.9, 0.1, 0.3])
            .map(|(&a, b)| C64::new(a, b))
            .collect();
        let a1 = build_a(1, &h5[..5]).unwrap();
        let a2 = build_a(2, &h5[..5]).unwrap();
        assert!(commutator_check(&a1, &a2).passed);
        let b2 = build_a(2, &h5).unwrap();
        let b3 = build_a(3, &h5).unwrap();
        assert!(commutator_check(&b2, &b3).passed);
        assert_eq!(commutator_check(&b3, &b3).norm, 0.0);
    }

    #[test]
    fn index_errors() {
        assert!(matches!(closure_terms(0, 1, 3), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(build_a(4, &[c(0.0); 4]), Err(Error::IndexOutOfRange { .. })));
        assert!(build_a(1, &[c(1.0), c(0.0)]).is_err());
    }
}
