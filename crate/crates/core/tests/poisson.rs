// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

use goldfish_core::hamfam::{deformed_tilde, observables, EtaFamily, PhaseState};
use goldfish_core::poisson::{
    bracket, bracket_scaled, build_a, closure_identity_check, coefficient_bracket_poly,
    commutator_check, r_bracket_check, translation_check, AnalyticContext, BracketRoute,
    FamilyNodes, FixedNodes, Observable, PowerNodes,
};
use goldfish_core::sampling::{random_complex, random_state, rng};
use goldfish_core::{Error, C64};
use proptest::prelude::*;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn worked_state() -> PhaseState {
    PhaseState::new(vec![c(0.0, 0.0), c(2f64.ln(), 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]).unwrap()
}

fn rel(value: C64, scale: f64) -> f64 {
    value.norm() / scale.max(1.0)
}

#[test]
fn momentum_position_bracket_is_n() {
    let mut r = rng(1);
    for n in 1..6 {
        let s = random_state(&mut r, n);
        let fam = EtaFamily::goldfish(n);
        for route in [BracketRoute::Analytic, BracketRoute::FiniteDiff] {
            let v = bracket(&Observable::TotalMomentum, &Observable::E(1), &fam, &s, route).unwrap();
            assert!((v - n as f64).norm() < 1e-8, "{route:?} {v}");
        }
    }
}

#[test]
fn h1_h2_in_involution() {
    let s = random_state(&mut rng(2), 4);
    let fam = EtaFamily::goldfish(4);
    let (v, scale) =
        bracket_scaled(&Observable::H(1), &Observable::H(2), &fam, &s, BracketRoute::Analytic).unwrap();
    assert!(rel(v, scale) < 1e-10);
}

#[test]
fn h1_e1_at_worked_state() {
    let fam = EtaFamily::goldfish(2);
    for route in [BracketRoute::Analytic, BracketRoute::FiniteDiff] {
        let v = bracket(&Observable::H(1), &Observable::E(1), &fam, &worked_state(), route).unwrap();
        assert!((v - 1.0).norm() < 1e-8);
    }
}

#[test]
fn unknown_observable_and_index() {
    assert!(matches!("x3".parse::<Observable>(), Err(Error::UnknownObservable(_))));
    let fam = EtaFamily::goldfish(2);
    let r = bracket(&Observable::H(3), &Observable::E(1), &fam, &worked_state(), BracketRoute::Analytic);
    assert!(matches!(r, Err(Error::IndexOutOfRange { .. })));
}

#[test]
fn degenerate_state_rejected() {
    let fam = EtaFamily::goldfish(2);
    let s = PhaseState {
        p: vec![c(0.0, 0.0); 2],
        q: vec![c(0.5, 0.0); 2],
    };
    let r = bracket(&Observable::H(1), &Observable::E(1), &fam, &s, BracketRoute::Analytic);
    assert!(matches!(r, Err(Error::DegenerateConfiguration { .. })));
}

#[test]
fn coefficient_table_of_h_with_itself_vanishes() {
    let s = random_state(&mut rng(3), 4);
    let fam = EtaFamily::goldfish(4);
    let t = coefficient_bracket_poly(&FamilyNodes(&fam), &FamilyNodes(&fam), &s).unwrap();
    assert!(t.basic_residual < 1e-8);
    assert!(t.table.iter().flatten().all(|x| x.norm() < 1e-8));
}

#[test]
fn coefficient_table_matches_elementwise_brackets() {
    let s = random_state(&mut rng(4), 2);
    let fam = EtaFamily::goldfish(2);
    let t = coefficient_bracket_poly(&FamilyNodes(&fam), &PowerNodes, &s).unwrap();
    assert!(t.basic_residual < 1e-8);
    for r in 0..2 {
        for q in 0..2 {
            let b = bracket(&Observable::H(r + 1), &Observable::E(q + 1), &fam, &s, BracketRoute::FiniteDiff)
                .unwrap();
            assert!((t.table[r][q] - b).norm() < 1e-6 * b.norm().max(1.0));
        }
    }
}

#[test]
fn constant_values_commute() {
    let s = random_state(&mut rng(5), 3);
    let a = FixedNodes(vec![c(1.0, 2.0), c(-0.5, 0.0), c(3.0, -1.0)]);
    let t = coefficient_bracket_poly(&a, &a, &s).unwrap();
    assert!(t.table.iter().flatten().all(|x| x.norm() < 1e-12));
    assert!(t.basic_residual < 1e-8);
}

#[test]
fn r_bracket_single_particle() {
    let s = PhaseState::new(vec![c(0.3, -0.2)], vec![c(1.5, 0.5)]).unwrap();
    let fam = EtaFamily::goldfish(1);
    let ctx = AnalyticContext::new(&fam, &s).unwrap();
    let (_, gh) = ctx.evaluate(&Observable::H(1)).unwrap();
    let (_, ge) = ctx.evaluate(&Observable::E(1)).unwrap();
    let v = goldfish_core::poisson::bracket_of(&gh, &ge).0;
    assert!((v - s.p[0].exp()).norm() < 1e-14);
    assert!(r_bracket_check(&fam, &s).unwrap().max_residual() < 1e-12);
}

#[test]
fn r_bracket_random_three() {
    let s = random_state(&mut rng(6), 3);
    let rep = r_bracket_check(&EtaFamily::goldfish(3), &s).unwrap();
    assert!(rep.node_residual <= 1e-8 && rep.symmetry_residual <= 1e-8, "{rep:?}");
}

#[test]
fn r_bracket_requires_goldfish() {
    let s = random_state(&mut rng(6), 3);
    assert!(matches!(
        r_bracket_check(&EtaFamily::linear(3), &s),
        Err(Error::UnsupportedFamily { .. })
    ));
}

#[test]
fn closure_first_index_identity() {
    let s = random_state(&mut rng(7), 4);
    let fam = EtaFamily::goldfish(4);
    let obs = observables(&fam, &s).unwrap();
    for k in 1..=4 {
        let (v, scale) =
            bracket_scaled(&Observable::H(k), &Observable::E(1), &fam, &s, BracketRoute::Analytic).unwrap();
        assert!(rel(v - obs.h[k - 1], scale) < 1e-10);
    }
}

#[test]
fn closure_two_two_by_finite_differences() {
    let s = random_state(&mut rng(8), 4);
    let fam = EtaFamily::goldfish(4);
    let r = closure_identity_check(2, 2, &fam, &s, BracketRoute::FiniteDiff).unwrap();
    assert!(r.closed_form.unwrap() < 1e-8, "{r:?}");
    assert!(r.recursion.unwrap() < 1e-6, "{r:?}");
    // independent oracle: e_2 h_1 - e_1 h_2 + h_3
    let o = observables(&fam, &s).unwrap();
    let expect = o.e[1] * o.h[0] - o.e[0] * o.h[1] + o.h[2];
    let v = bracket(&Observable::H(2), &Observable::E(2), &fam, &s, BracketRoute::FiniteDiff).unwrap();
    assert!((v - expect).norm() < 1e-6 * expect.norm().max(1.0));
}

#[test]
fn closure_full_range_analytic() {
    let mut r = rng(9);
    for n in 2..=6 {
        let s = random_state(&mut r, n);
        let fam = EtaFamily::goldfish(n);
        for k in 0..=n {
            for l in 0..=n {
                let res = closure_identity_check(k, l, &fam, &s, BracketRoute::Analytic).unwrap();
                if let Some(x) = res.closed_form {
                    assert!(x <= 1e-8, "n={n} k={k} l={l} {x}");
                }
                if let Some(x) = res.recursion {
                    assert!(x <= 1e-8, "n={n} k={k} l={l} {x}");
                }
            }
        }
    }
    assert!(matches!(
        closure_identity_check(3, 1, &EtaFamily::goldfish(2), &worked_state(), BracketRoute::Analytic),
        Err(Error::IndexOutOfRange { .. })
    ));
}

#[test]
fn structure_matrix_reproduces_brackets() {
    let mut r = rng(10);
    for n in [2, 3, 5] {
        let s = random_state(&mut r, n);
        let fam = EtaFamily::goldfish(n);
        let o = observables(&fam, &s).unwrap();
        for k in 1..=n {
            let a = build_a(k, &o.h_extended()).unwrap();
            let rate = a.apply(&o.e_extended());
            assert_eq!(rate[0], c(0.0, 0.0));
            for j in 1..=n {
                let (b, scale) =
                    bracket_scaled(&Observable::H(k), &Observable::E(j), &fam, &s, BracketRoute::Analytic)
                        .unwrap();
                assert!(rel(rate[j] - b, scale.max(rate[j].norm())) < 1e-8, "n={n} k={k} j={j}");
            }
        }
    }
}

#[test]
fn commutators_on_observed_h() {
    let mut r = rng(11);
    for (n, k, l) in [(4, 1, 2), (5, 2, 3), (6, 3, 5)] {
        let s = random_state(&mut r, n);
        let h = observables(&EtaFamily::goldfish(n), &s).unwrap().h_extended();
        let c = commutator_check(&build_a(k, &h).unwrap(), &build_a(l, &h).unwrap());
        assert!(c.passed, "{c:?}");
    }
}

#[test]
fn translation_identity() {
    let fam = EtaFamily::goldfish(2);
    let r2 = translation_check(2, &fam, &worked_state()).unwrap();
    assert!(r2.bracket_residual < 1e-8);
    let v = bracket(&Observable::H(2), &Observable::TotalMomentum, &fam, &worked_state(), BracketRoute::FiniteDiff)
        .unwrap();
    assert!((v - 1.0).norm() < 1e-6);
    let mut r = rng(12);
    for n in 1..=5 {
        let s = random_state(&mut r, n);
        for fam in [EtaFamily::goldfish(n), EtaFamily::linear(n)] {
            for k in 1..=n {
                let t = translation_check(k, &fam, &s).unwrap();
                assert!(t.bracket_residual < 1e-8, "{} n={n} k={k} {t:?}", fam.name());
                assert!(t.double_bracket_residual < 1e-6, "{} n={n} k={k} {t:?}", fam.name());
            }
        }
    }
}

fn pairs(n: usize) -> Vec<Observable> {
    let mut v: Vec<Observable> = (1..=n).map(Observable::H).collect();
    v.extend((1..=n).map(Observable::E));
    v.push(Observable::TotalMomentum);
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn involution_of_hamiltonians(seed in any::<u64>(), n in 2usize..=6) {
        let mut r = rng(seed);
        let s = random_state(&mut r, n);
        let alpha = random_complex(&mut r);
        for fam in [EtaFamily::goldfish(n), EtaFamily::linear(n)] {
            let ctx = AnalyticContext::new(&fam, &s).unwrap();
            for k in 1..=n {
                for l in 1..=n {
                    let (hk, gk) = ctx.evaluate(&Observable::H(k)).unwrap();
                    let (hl, gl) = ctx.evaluate(&Observable::H(l)).unwrap();
                    let v = goldfish_core::poisson::bracket_of(&gk, &gl).0;
                    prop_assert!(v.norm() <= 1e-8 * (hk * hl).norm().max(1.0));
                }
            }
        }
        let fam = EtaFamily::goldfish(n);
        let ctx = AnalyticContext::new(&fam, &s).unwrap();
        let tilde = deformed_tilde(&fam, alpha, &s).unwrap();
        for k in 1..=n {
            for l in 1..=n {
                let (_, gk) = ctx.evaluate(&Observable::HTilde { k, alpha }).unwrap();
                let (_, gl) = ctx.evaluate(&Observable::HTilde { k: l, alpha }).unwrap();
                let v = goldfish_core::poisson::bracket_of(&gk, &gl).0;
                let scale = (tilde.h[k - 1] * tilde.h[l - 1]).norm().max(1.0);
                prop_assert!(v.norm() <= 1e-8 * scale, "k={} l={} {}", k, l, v);
            }
        }
    }

    #[test]
    fn analytic_and_finite_difference_agree(seed in any::<u64>(), n in 2usize..=6) {
        let s = random_state(&mut rng(seed), n);
        let fam = EtaFamily::goldfish(n);
        let obs = pairs(n);
        let ctx = AnalyticContext::new(&fam, &s).unwrap();
        for o in &obs {
            let (_, ga) = ctx.evaluate(o).unwrap();
            let gf = goldfish_core::poisson::gradient(o, &fam, &s, BracketRoute::FiniteDiff).unwrap();
            for (a, f) in ga.dp.iter().chain(&ga.dq).zip(gf.dp.iter().chain(&gf.dq)) {
                prop_assert!((a - f).norm() <= 1e-6 * a.norm().max(1.0), "{} {} {}", o, a, f);
            }
        }
    }

    #[test]
    fn symmetry_identity_and_lambda(seed in any::<u64>(), n in 2usize..=6) {
        let s = random_state(&mut rng(seed), n);
        let fam = EtaFamily::goldfish(n);
        let ctx = AnalyticContext::new(&fam, &s).unwrap();
        let o = observables(&fam, &s).unwrap();
        let (_, g1) = ctx.evaluate(&Observable::H(1)).unwrap();
        for k in 1..=n {
            let (_, gh) = ctx.evaluate(&Observable::H(k)).unwrap();
            let (_, ge1) = ctx.evaluate(&Observable::E(k)).unwrap();
            let (v, sc) = goldfish_core::poisson::bracket_of(&g1, &ge1);
            prop_assert!(rel(v - o.h[k - 1], sc.max(o.h[k - 1].norm())) <= 1e-10);
            for l in 1..=n {
                let (_, gel) = ctx.evaluate(&Observable::E(l)).unwrap();
                let (_, ghl) = ctx.evaluate(&Observable::H(l)).unwrap();
                let (a, sa) = goldfish_core::poisson::bracket_of(&gh, &gel);
                let (b, sb) = goldfish_core::poisson::bracket_of(&ghl, &ge1);
                prop_assert!(rel(a - b, sa.max(sb)) <= 1e-8);
                let (_, gl) = ctx.evaluate(&Observable::Lambda(k, l)).unwrap();
                let (lv, ls) = goldfish_core::poisson::bracket_of(&g1, &gl);
                prop_assert!(rel(lv, ls) <= 1e-8, "lambda {} {}: {}", k, l, lv);
            }
        }
    }
}
