// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

use goldfish_core::flow::{hamilton_rhs, integrate, reduced_rhs, FlowKind, FlowSpec};
use goldfish_core::hamfam::{EtaFamily, PhaseState};
use goldfish_core::polycore::Polynomial;
use goldfish_core::sampling::{random_state, rng};
use goldfish_core::sepvar::{
    action, beta_constants, beta_linear_closed_form, hamilton_jacobi_check, momentum_recovery_check,
    recover_momenta, track_beta, track_momenta, SeparationData,
};
use goldfish_core::{Error, C64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn max_dev(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn recovery_at_initial_state_and_off_shell() {
    let s = random_state(&mut rng(41), 3);
    let fam = EtaFamily::goldfish(3);
    let sep = SeparationData::new(&fam, &s).unwrap();
    let rec = momentum_recovery_check(&sep, &s).unwrap();
    assert!(rec.residual < 1e-13);
    assert!(max_dev(&rec.recovered, &s.p) < 1e-12);
    let mut off = s.clone();
    off.p[1] += 1e-3;
    let bad = momentum_recovery_check(&sep, &off).unwrap();
    assert!(bad.residual > 1e-4 && bad.residual < 1e-2);
}

#[test]
fn recovery_along_trajectory() {
    let s = random_state(&mut rng(42), 3);
    let fam = EtaFamily::goldfish(3);
    let sep = SeparationData::new(&fam, &s).unwrap();
    let traj = integrate(&FlowSpec::new(FlowKind::SingleH { k: 1 }, fam, (0.0, 1.0), 21).unwrap(), &s).unwrap();
    let path: Vec<Vec<C64>> = traj.states.iter().map(|st| st.q.clone()).collect();
    let tracked = track_momenta(&sep, &path, &s.p).unwrap();
    for (st, p) in traj.states.iter().zip(&tracked) {
        assert!(momentum_recovery_check(&sep, st).unwrap().residual <= 1e-7);
        assert!(max_dev(p, &st.p) <= 1e-7);
    }
}

#[test]
fn linear_action_examples() {
    let one = EtaFamily::linear(1);
    let q = [c(1.3, -0.4)];
    let sep = SeparationData::from_polynomial(&one, Polynomial::constant(c(2.0, 1.0))).unwrap();
    assert!((action(&sep, &q).unwrap() - c(2.0, 1.0) * q[0]).norm() < 1e-14);
    let sep = SeparationData::from_polynomial(&one, Polynomial::from_real(&[1.0, 0.0])).unwrap();
    assert!((action(&sep, &q).unwrap() - q[0] * q[0] / 2.0).norm() < 1e-14);
}

#[test]
fn goldfish_hamilton_jacobi() {
    let s = random_state(&mut rng(43), 2);
    let sep = SeparationData::new(&EtaFamily::goldfish(2), &s).unwrap();
    assert!(hamilton_jacobi_check(&sep, &s.q).unwrap().residual <= 1e-6);
}

#[test]
fn beta_examples() {
    let lin = EtaFamily::linear(2);
    let q = [r(1.0), r(2.0)];
    let sep = SeparationData::from_polynomial(&lin, Polynomial::from_real(&[0.5, -1.0])).unwrap();
    let b = beta_constants(&sep, &q).unwrap();
    assert!((b[0] - 2.5).norm() < 1e-12 && (b[1] - 3.0).norm() < 1e-12);
    assert!(max_dev(&b, &beta_linear_closed_form(&q)) < 1e-12);
    let zero = beta_constants(&sep, &[r(0.0), r(0.0)]).unwrap();
    assert!(zero.iter().all(|x| x.norm() == 0.0));

    // goldfish: integrand y^{N-l} / P0(y); for P0 = a + b y the l = N term is log
    let gold = EtaFamily::goldfish(2);
    let (a, bb) = (c(1.0, 0.5), c(0.3, -0.2));
    let sep = SeparationData::from_polynomial(&gold, Polynomial::new(vec![bb, a])).unwrap();
    let q = [c(0.4, 0.1), c(-0.6, 0.3)];
    let b = beta_constants(&sep, &q).unwrap();
    let log_term: C64 = q.iter().map(|z| ((a + bb * z) / a).ln() / bb).sum();
    let lin_term: C64 = q.iter().map(|z| (z - a / bb * ((a + bb * z) / a).ln()) / bb).sum();
    assert!((b[1] - log_term).norm() < 1e-10, "{}", (b[1] - log_term).norm());
    assert!((b[0] - lin_term).norm() < 1e-10, "{}", (b[0] - lin_term).norm());
    let zero = beta_constants(&sep, &[r(0.0), r(0.0)]).unwrap();
    assert!(zero.iter().all(|x| x.norm() == 0.0));
}

#[test]
fn contour_through_zero_of_p0() {
    let gold = EtaFamily::goldfish(2);
    // P0 = y - 0.5 vanishes on the segment to q_1 = 1
    let sep = SeparationData::from_polynomial(&gold, Polynomial::from_real(&[1.0, -0.5])).unwrap();
    match beta_constants(&sep, &[r(1.0), c(0.0, 1.0)]) {
        Err(Error::ContourSingularity { index, distance, .. }) => {
            assert_eq!(index, 0);
            assert!(distance < 1e-12);
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(action(&sep, &[r(1.0), c(0.0, 1.0)]), Err(Error::ContourSingularity { .. })));
}

#[test]
fn branch_ambiguity_at_zero_of_p0() {
    let gold = EtaFamily::goldfish(1);
    let sep = SeparationData::from_polynomial(&gold, Polynomial::from_real(&[1.0, -0.5])).unwrap();
    assert!(matches!(
        recover_momenta(&sep, &[r(0.5)], None),
        Err(Error::BranchAmbiguity { index: 0, .. })
    ));
}

#[test]
fn beta_continued_across_swept_zero() {
    // P0 = y - 1/2; q_1 runs down the line Re y = 1, so [0, q_1] sweeps the zero
    let gold = EtaFamily::goldfish(2);
    let sep = SeparationData::from_polynomial(&gold, Polynomial::from_real(&[1.0, -0.5])).unwrap();
    let q2 = c(-1.0, 0.0);
    let steps = 201;
    let path: Vec<Vec<C64>> = (0..=steps)
        .map(|i| vec![c(1.0, 0.5 - i as f64 / steps as f64), q2])
        .collect();
    let track = track_beta(&sep, &path).unwrap();
    assert_eq!(track.crossings.len(), 1);
    assert_eq!(track.crossings[0].k, 0);
    assert_eq!(track.crossings[0].orientation, -1);
    assert!((track.crossings[0].pole - 0.5).norm() < 1e-14);

    // oracle: antiderivative log(y - 1/2) unwrapped step by step along the path
    let start = beta_constants(&sep, &path[0]).unwrap();
    let mut log_gain = c(0.0, 0.0);
    for w in path.windows(2) {
        log_gain += ((w[1][0] - 0.5) / (w[0][0] - 0.5)).ln();
    }
    let y0 = path[0][0];
    let y1 = path[steps][0];
    // integrands: y / (y - 1/2) = 1 + (1/2) / (y - 1/2) and 1 / (y - 1/2)
    let want = [start[0] + (y1 - y0) + log_gain * 0.5, start[1] + log_gain];
    let got = &track.values[steps];
    assert!(max_dev(got, &want) < 1e-10, "{got:?} vs {want:?}");

    // the straight-contour value differs by exactly the swept period
    let straight = beta_constants(&sep, &path[steps]).unwrap();
    let period = c(0.0, -2.0 * std::f64::consts::PI);
    assert!((got[1] - straight[1] - period).norm() < 1e-10);
}

#[test]
fn beta_track_without_crossings_is_straight() {
    let s = random_state(&mut rng(45), 3);
    for fam in [EtaFamily::linear(3), EtaFamily::goldfish(3)] {
        let sep = SeparationData::new(&fam, &s).unwrap();
        let path: Vec<Vec<C64>> = (0..5).map(|i| s.q.iter().map(|x| x * (1.0 + 0.001 * i as f64)).collect()).collect();
        let track = track_beta(&sep, &path).unwrap();
        if track.crossings.is_empty() {
            for (v, q) in track.values.iter().zip(&path) {
                assert_eq!(v, &beta_constants(&sep, q).unwrap());
            }
        }
    }
}

fn beta_drift(fam: &EtaFamily, s: &PhaseState, k: usize, t1: f64) -> Result<f64, Error> {
    let n = s.n();
    let sep = SeparationData::new(fam, s)?;
    let traj = integrate(&FlowSpec::new(FlowKind::SingleH { k }, fam.clone(), (0.0, t1), 41)?, s)?;
    let b0 = beta_constants(&sep, &s.q)?;
    let scale = b0.iter().map(|x| x.norm()).fold(1.0, f64::max);
    let path: Vec<Vec<C64>> = traj.states.iter().map(|st| st.q.clone()).collect();
    let track = track_beta(&sep, &path)?;
    let mut worst = 0.0_f64;
    for (t, b) in traj.times.iter().zip(&track.values) {
        for l in 1..=n {
            let shift = if l == k { *t } else { 0.0 };
            worst = worst.max((b[l - 1] - b0[l - 1] - shift).norm() / scale);
        }
    }
    Ok(worst)
}

#[test]
fn beta_conservation_both_families() {
    let mut g = rng(44);
    for n in [2, 3] {
        for k in 1..=n {
            let s = random_state(&mut g, n);
            for fam in [EtaFamily::linear(n), EtaFamily::goldfish(n)] {
                let d = beta_drift(&fam, &s, k, 0.2).unwrap();
                assert!(d <= 1e-6, "{} n={n} k={k} drift {d}", fam.name());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reduced_system_is_hamilton_system(seed in any::<u64>(), n in 1usize..=5) {
        let s = random_state(&mut rng(seed), n);
        for fam in [EtaFamily::goldfish(n), EtaFamily::linear(n)] {
            let sep = SeparationData::new(&fam, &s).unwrap();
            let p = recover_momenta(&sep, &s.q, Some(&s.p)).unwrap();
            let st = PhaseState::new(p, s.q.clone()).unwrap();
            let spec = FlowSpec::new(FlowKind::SingleH { k: 1 }, fam.clone(), (0.0, 1.0), 2).unwrap();
            let (_, dq) = hamilton_rhs(&spec, &st).unwrap();
            let red = reduced_rhs(&fam, &sep.p0, &s.q).unwrap();
            let scale = dq.iter().map(|x| x.norm()).fold(1.0, f64::max);
            prop_assert!(max_dev(&dq, &red) <= 1e-9 * scale);
        }
    }

    #[test]
    fn hamilton_jacobi_random(seed in any::<u64>(), n in 1usize..=3) {
        let s = random_state(&mut rng(seed), n);
        for fam in [EtaFamily::goldfish(n), EtaFamily::linear(n)] {
            let sep = SeparationData::new(&fam, &s).unwrap();
            match hamilton_jacobi_check(&sep, &s.q) {
                Ok(hj) => prop_assert!(hj.residual <= 1e-6, "{}", hj.residual),
                Err(Error::ContourSingularity { .. }) => {}
                Err(e) => panic!("{e:?}"),
            }
        }
    }
}
