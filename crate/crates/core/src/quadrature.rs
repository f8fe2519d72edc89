// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

//! Adaptive 7/15-point Gauss-Kronrod quadrature of complex integrands
//! along straight segments of the complex plane.

use crate::C64;

#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7]
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Points per panel.
pub const NODES: usize = 15;
pub const MAX_DEPTH: u32 = 30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: C64,
    pub error: f64,
    pub evaluations: usize,
}

/// Failure with the error estimate reached before giving up.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureError {
    pub estimated_error: f64,
}

/// Kronrod estimate and |Kronrod - Gauss| on `[a, b]` of the segment
/// parameter, with `dy = z ds` folded into `f`.
fn panel<F: Fn(f64) -> C64>(f: &F, a: f64, b: f64) -> (C64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut kronrod = f(c) * WGK[7];
    let mut gauss = f(c) * WG[3];
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kronrod += s * WGK[i];
        if i % 2 == 1 {
            gauss += s * WG[i / 2];
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).norm())
}

/// `int_0^1 g(s) ds` by recursive bisection, each panel accepted once its
/// error estimate is within its share of `abs_tol`.
fn adaptive<F: Fn(f64) -> C64>(
    f: &F,
    a: f64,
    b: f64,
    whole: (C64, f64),
    abs_tol: f64,
    depth: u32,
    evals: &mut usize,
) -> Result<(C64, f64), QuadratureError> {
    let (value, err) = whole;
    if err <= abs_tol || (err <= 50.0 * f64::EPSILON * value.norm()) {
        return Ok((value, err));
    }
    if depth >= MAX_DEPTH {
        return Err(QuadratureError { estimated_error: err });
    }
    let m = 0.5 * (a + b);
    let left = panel(f, a, m);
    let right = panel(f, m, b);
    *evals += 2 * NODES;
    let (lv, le) = adaptive(f, a, m, left, 0.5 * abs_tol, depth + 1, evals)?;
    let (rv, re) = adaptive(f, m, b, right, 0.5 * abs_tol, depth + 1, evals)?;
    Ok((lv + rv, le + re))
}

/// `int_0^z g(y) dy` along the straight segment, with relative tolerance
/// `rel` against the first whole-segment estimate (absolute floor `rel`).
pub fn segment_integral<G: Fn(C64) -> C64>(g: G, z: C64, rel: f64) -> Result<Quadrature, QuadratureError> {
    if z.norm() == 0.0 {
        return Ok(Quadrature {
            value: C64::new(0.0, 0.0),
            error: 0.0,
            evaluations: 0,
        });
    }
    let f = |s: f64| g(z * s) * z;
    let whole = panel(&f, 0.0, 1.0);
    let mut evals = NODES;
    let abs_tol = rel * whole.0.norm().max(1.0);
    let (value, error) = adaptive(&f, 0.0, 1.0, whole, abs_tol, 0, &mut evals)?;
    Ok(Quadrature {
        value,
        error,
        evaluations: evals,
    })
}

/// Distance from `x` to the segment `[0, z]`.
pub fn distance_to_segment(x: C64, z: C64) -> f64 {
    let len2 = z.norm_sqr();
    if len2 == 0.0 {
        return x.norm();
    }
    let s = ((x * z.conj()).re / len2).clamp(0.0, 1.0);
    (x - z * s).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let z = C64::new(1.5, -0.7);
        let q = segment_integral(|y| y * y * y + y * 2.0 + 1.0, z, 1e-12).unwrap();
        let want = z.powu(4) / 4.0 + z * z + z;
        assert!((q.value - want).norm() < 1e-14);
        assert_eq!(q.evaluations, NODES);
    }

    #[test]
    fn logarithm_near_branch_point() {
        // int_0^z log(1 - y/r) dy with r just off the segment
        let r = C64::new(0.5, 1e-3);
        let z = C64::new(1.0, 0.0);
        let q = segment_integral(|y| (1.0 - y / r).ln(), z, 1e-10).unwrap();
        let u = 1.0 - z / r;
        let want = -r * (u * u.ln() - u + 1.0);
        assert!((q.value - want).norm() < 1e-9, "{}", (q.value - want).norm());
    }

    #[test]
    fn pole_on_segment_fails() {
        let z = C64::new(2.0, 0.0);
        let r = segment_integral(|y| 1.0 / (y - 1.0), z, 1e-10);
        assert!(r.is_err());
    }

    #[test]
    fn segment_distance() {
        let z = C64::new(2.0, 0.0);
        assert_eq!(distance_to_segment(C64::new(1.0, 0.5), z), 0.5);
        assert_eq!(distance_to_segment(C64::new(-3.0, 4.0), z), 5.0);
        assert_eq!(distance_to_segment(C64::new(2.0, 0.0), C64::new(0.0, 0.0)), 2.0);
    }
}
