// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

//! Dormand-Prince 5(4) with PI step control and the standard fourth-order
//! dense output, for complex state vectors over real time.

use crate::error::{Error, Result};
use crate::C64;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const BETA: f64 = 0.04;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;
const MAX_STEPS: usize = 1_000_000;

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: crate::tolerance::RK_REL,
            atol: crate::tolerance::RK_ABS,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

fn combo(y: &[C64], h: f64, terms: &[(f64, &[C64])]) -> Vec<C64> {
    let mut out = y.to_vec();
    for &(a, k) in terms {
        if a == 0.0 {
            continue;
        }
        for (o, x) in out.iter_mut().zip(k) {
            *o += x * (h * a);
        }
    }
    out
}

fn error_norm(err: &[C64], y: &[C64], y_new: &[C64], opt: &OdeOptions) -> f64 {
    let sum: f64 = err
        .iter()
        .zip(y.iter().zip(y_new))
        .map(|(e, (a, b))| {
            let sc = opt.atol + opt.rtol * a.norm().max(b.norm());
            (e.norm() / sc).powi(2)
        })
        .sum();
    (sum / err.len().max(1) as f64).sqrt()
}

/// Integrates `y' = f(t, y)` from `times[0]` and returns the solution at
/// every entry of `times` (non-decreasing). `check` runs after each
/// accepted step and may abort with an error; it receives the step end
/// time, the index of the next sample still to emit and the new state.
pub fn integrate_dense<F, G>(
    mut f: F,
    y0: &[C64],
    times: &[f64],
    opt: OdeOptions,
    mut check: G,
) -> Result<(Vec<Vec<C64>>, OdeStats)>
where
    F: FnMut(f64, &[C64]) -> Result<Vec<C64>>,
    G: FnMut(f64, usize, &[C64]) -> Result<()>,
{
    let mut stats = OdeStats::default();
    let mut out = Vec::with_capacity(times.len());
    if times.is_empty() {
        return Ok((out, stats));
    }
    if times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidInput("sample times must be non-decreasing".into()));
    }
    let t_end = *times.last().unwrap();
    let mut t = times[0];
    let mut y = y0.to_vec();
    let mut next = 0;
    while next < times.len() && times[next] <= t {
        out.push(y.clone());
        next += 1;
    }
    if next == times.len() {
        return Ok((out, stats));
    }

    let mut eval = |t: f64, y: &[C64], stats: &mut OdeStats| {
        stats.evaluations += 1;
        f(t, y)
    };
    let mut k1 = eval(t, &y, &mut stats)?;
    let mut h = initial_step(&mut eval, t, &y, &k1, t_end - t, &opt, &mut stats)?;
    let mut fac_old = 1e-4_f64;
    let mut rejected_last = false;

    while next < times.len() {
        if stats.accepted + stats.rejected > MAX_STEPS {
            return Err(Error::StepSizeUnderflow { time: t, step: h });
        }
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { time: t, step: h });
        }
        let last = t + h >= t_end;
        if last {
            h = t_end - t;
        }
        let y2 = combo(&y, h, &[(A21, &k1)]);
        let k2 = eval(t + C2 * h, &y2, &mut stats)?;
        let y3 = combo(&y, h, &[(A31, &k1), (A32, &k2)]);
        let k3 = eval(t + C3 * h, &y3, &mut stats)?;
        let y4 = combo(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        let k4 = eval(t + C4 * h, &y4, &mut stats)?;
        let y5 = combo(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        let k5 = eval(t + C5 * h, &y5, &mut stats)?;
        let y6 = combo(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
        let k6 = eval(t + h, &y6, &mut stats)?;
        let y_new = combo(&y, h, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = eval(t + h, &y_new, &mut stats)?;
        let err: Vec<C64> = (0..y.len())
            .map(|i| (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * h)
            .collect();
        let err_norm = error_norm(&err, &y, &y_new, &opt);
        if !err_norm.is_finite() {
            stats.rejected += 1;
            h *= FAC_MIN;
            rejected_last = true;
            continue;
        }
        let fac11 = err_norm.powf(0.2 - BETA * 0.75);
        if err_norm <= 1.0 {
            stats.accepted += 1;
            let t_new = if last { t_end } else { t + h };
            // dense output on [t, t_new]
            let ydiff: Vec<C64> = y_new.iter().zip(&y).map(|(a, b)| a - b).collect();
            let bspl: Vec<C64> = k1.iter().zip(&ydiff).map(|(k, d)| k * h - d).collect();
            let rc4: Vec<C64> = (0..y.len()).map(|i| ydiff[i] - k7[i] * h - bspl[i]).collect();
            let rc5: Vec<C64> = (0..y.len())
                .map(|i| (k1[i] * D1 + k3[i] * D3 + k4[i] * D4 + k5[i] * D5 + k6[i] * D6 + k7[i] * D7) * h)
                .collect();
            while next < times.len() && times[next] <= t_new {
                let s = times[next];
                if s == t_new {
                    out.push(y_new.clone());
                } else {
                    let th = (s - t) / h;
                    let th1 = 1.0 - th;
                    out.push(
                        (0..y.len())
                            .map(|i| y[i] + (ydiff[i] + (bspl[i] + (rc4[i] + rc5[i] * th1) * th) * th1) * th)
                            .collect(),
                    );
                }
                next += 1;
            }
            check(t_new, next, &y_new)?;
            t = t_new;
            y = y_new;
            k1 = k7;
            let mut fac = fac11 / fac_old.powf(BETA);
            fac = (fac / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
            let mut h_new = h / fac;
            if rejected_last {
                h_new = h_new.min(h);
            }
            fac_old = err_norm.max(1e-4);
            rejected_last = false;
            h = h_new;
        } else {
            stats.rejected += 1;
            h /= (fac11 / SAFETY).min(1.0 / FAC_MIN);
            rejected_last = true;
        }
    }
    Ok((out, stats))
}

fn initial_step<F>(
    eval: &mut F,
    t: f64,
    y: &[C64],
    f0: &[C64],
    span: f64,
    opt: &OdeOptions,
    stats: &mut OdeStats,
) -> Result<f64>
where
    F: FnMut(f64, &[C64], &mut OdeStats) -> Result<Vec<C64>>,
{
    let sk: Vec<f64> = y.iter().map(|v| opt.atol + opt.rtol * v.norm()).collect();
    let rms = |v: &[C64]| -> f64 {
        (v.iter().zip(&sk).map(|(x, s)| (x.norm() / s).powi(2)).sum::<f64>() / v.len().max(1) as f64).sqrt()
    };
    let d0 = rms(y);
    let d1 = rms(f0);
    let mut h = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(span);
    let y1 = combo(y, h, &[(1.0, f0)]);
    let f1 = eval(t + h, &y1, stats)?;
    let diff: Vec<C64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
    let d2 = rms(&diff) / h;
    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 {
        (h * 1e-3).max(1e-6)
    } else {
        (0.01 / dm).powf(0.2)
    };
    Ok((100.0 * h).min(h1).min(span).max(1e-12 * span.max(1.0)))
}
