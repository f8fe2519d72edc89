// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

//! Label-preserving root matching between consecutive samples of a trajectory.

use serde::Serialize;

use super::roots::RootSet;
use crate::error::{Error, Result};
use crate::tolerance;

/// Minimum-cost perfect matching on a square cost matrix (Kuhn-Munkres with
/// potentials). Returns `assignment[row] = col` and the total cost.
pub fn hungarian(cost: &[Vec<f64>]) -> (Vec<usize>, f64) {
    let n = cost.len();
    if n == 0 {
        return (Vec::new(), 0.0);
    }
    // 1-based arrays; column 0 is a virtual start.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut matched_row = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=n {
        assignment[matched_row[j] - 1] = j - 1;
    }
    let total = assignment.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    (assignment, total)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootMatch {
    /// `ordered.roots[k]` continues trajectory label `k`.
    pub ordered: RootSet,
    pub cost: f64,
    /// Cost of the best assignment that differs from the optimal one.
    pub runner_up_cost: f64,
    /// Set when the two costs are closer than the matching tolerance, which
    /// signals a near collision of roots.
    pub ambiguous: bool,
}

/// Reorders `next` to continue the labels of `prev` by minimising
/// `sum_k |prev_k - next_sigma(k)|` over all permutations.
pub fn match_roots(prev: &RootSet, next: &RootSet) -> Result<RootMatch> {
    if prev.len() != next.len() {
        return Err(Error::DimensionMismatch {
            expected: prev.len(),
            found: next.len(),
        });
    }
    let n = prev.len();
    let cost: Vec<Vec<f64>> = prev
        .roots
        .iter()
        .map(|&a| next.roots.iter().map(|&b| (a - b).norm()).collect())
        .collect();
    let (assignment, best) = hungarian(&cost);

    // The runner-up differs from the optimum in at least one edge; forbid
    // each optimal edge in turn and keep the cheapest alternative.
    let mut runner_up = f64::INFINITY;
    if n > 1 {
        for (row, &col) in assignment.iter().enumerate() {
            let mut blocked = cost.clone();
            blocked[row][col] = f64::INFINITY;
            let (alt, alt_cost) = hungarian(&blocked);
            if alt[row] != col && alt_cost.is_finite() {
                runner_up = runner_up.min(alt_cost);
            }
        }
    }
    let scale = prev
        .roots
        .iter()
        .chain(&next.roots)
        .map(|r| r.norm())
        .fold(1.0, f64::max);
    let ambiguous = runner_up - best < tolerance::MATCH_GAP * scale;
    if ambiguous {
        log::warn!(
            "ambiguous root matching: cost gap {:e} (near root collision)",
            runner_up - best
        );
    }
    Ok(RootMatch {
        ordered: RootSet::new(assignment.iter().map(|&j| next.roots[j]).collect()),
        cost: best,
        runner_up_cost: runner_up,
        ambiguous,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::C64;

    fn rs(xs: &[f64]) -> RootSet {
        RootSet::new(xs.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    fn reals(r: &RootSet) -> Vec<f64> {
        r.roots.iter().map(|z| z.re).collect()
    }

    #[test]
    fn nearest_neighbour_pair() {
        let m = match_roots(&rs(&[1.0, 2.0]), &rs(&[2.01, 0.99])).unwrap();
        assert_eq!(reals(&m.ordered), vec![0.99, 2.01]);
        assert!(!m.ambiguous);
    }

    #[test]
    fn identity_match() {
        let m = match_roots(&rs(&[1.0, 2.0]), &rs(&[1.0, 2.0])).unwrap();
        assert_eq!(reals(&m.ordered), vec![1.0, 2.0]);
        assert_eq!(m.cost, 0.0);
        assert!((m.runner_up_cost - 2.0).abs() < 1e-15);
    }

    /// All permutations of `0..n`, used as a brute-force oracle.
    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    #[test]
    fn three_roots_against_brute_force() {
        let prev = rs(&[0.0, 1.0, 2.0]);
        let next = rs(&[2.1, -0.1, 1.05]);
        let best = permutations(3)
            .into_iter()
            .min_by(|a, b| {
                let ca: f64 = a.iter().enumerate().map(|(i, &j)| (prev.roots[i] - next.roots[j]).norm()).sum();
                let cb: f64 = b.iter().enumerate().map(|(i, &j)| (prev.roots[i] - next.roots[j]).norm()).sum();
                ca.total_cmp(&cb)
            })
            .unwrap();
        let expected: Vec<f64> = best.iter().map(|&j| next.roots[j].re).collect();
        assert_eq!(expected, vec![-0.1, 1.05, 2.1]);
        let m = match_roots(&prev, &next).unwrap();
        assert_eq!(reals(&m.ordered), expected);
    }

    #[test]
    fn hungarian_matches_brute_force_on_dense_costs() {
        let cost = vec![
            vec![4.0, 1.0, 3.0, 2.5],
            vec![2.0, 0.0, 5.0, 1.0],
            vec![3.0, 2.0, 2.0, 0.5],
            vec![1.5, 3.5, 0.7, 2.2],
        ];
        let brute = permutations(4)
            .into_iter()
            .map(|p| p.iter().enumerate().map(|(i, &j)| cost[i][j]).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let (_, total) = hungarian(&cost);
        assert!((total - brute).abs() < 1e-12);
    }

    #[test]
    fn collision_is_flagged() {
        let m = match_roots(&rs(&[1.0, 1.0 + 1e-9]), &rs(&[1.0, 1.0 + 1e-9])).unwrap();
        assert!(m.ambiguous);
    }

    #[test]
    fn size_mismatch() {
        assert!(matches!(
            match_roots(&rs(&[1.0]), &rs(&[1.0, 2.0])),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
