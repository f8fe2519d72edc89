// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use goldfish_core::flow::{
    exact_general_flow, exact_goldfish, exact_linear_flow, exact_tilde_flow, integrate, integrate_reduced,
    jacobian_rank, multiset_deviation, positions_from_e, superintegrals, FlowKind, FlowSpec, Trajectory,
};
use goldfish_core::hamfam::{family_polynomial, observables, EtaFamily, ObservableSet, PhaseState, DERIVATIVE_TOL, INVERSE_TOL};
use goldfish_core::poisson::{
    bracket_of, build_a, closure_identity_check, coefficient_bracket_poly, commutator_check,
    finite_difference_gradient, observable_value, r_bracket_check, translation_check, AnalyticContext,
    BracketRoute, FamilyNodes, Gradient, Observable, PowerNodes,
};
use goldfish_core::sepvar::{
    beta_constants, beta_linear_closed_form, hamilton_jacobi_check, momentum_recovery_check, track_beta, track_momenta,
    SeparationData,
};
use goldfish_core::tolerance::scaled;
use goldfish_core::{Error, C64};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{ExperimentConfig, Tolerances};
use crate::error::CliError;
use crate::report::{CheckSet, Level, Report};

/// Relative slack when deciding that a time span is a whole number of
/// isochrony periods.
const PERIOD_MATCH: f64 = 1e-9;

fn rel_dev(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| scaled((x - y).norm(), y.norm()))
        .fold(0.0, f64::max)
}

/// Registration checks; returns the family when it passed.
fn family_checks(cfg: &ExperimentConfig, report: &mut Report) -> Result<Option<EtaFamily>, CliError> {
    let setup = report.timed("family", || cfg.family())?;
    report.check("family_inverse", setup.consistency.inverse_residual, INVERSE_TOL);
    report.check("family_derivative", setup.consistency.derivative_residual, DERIVATIVE_TOL);
    if let Some(err) = &setup.rejection {
        report.error(err, Value::Null);
    }
    Ok(setup.family)
}

fn config_error(e: Error) -> CliError {
    CliError::Config(e.to_string())
}

// ---------------------------------------------------------------- verify

fn fd_gradient(obs: &Observable, fam: &EtaFamily, s: &PhaseState) -> Result<Gradient, Error> {
    finite_difference_gradient(|st| observable_value(obs, fam, st), s)
}

fn verify_sample(fam: &EtaFamily, s: &PhaseState, tol: &Tolerances) -> Result<CheckSet, Error> {
    let n = s.n();
    let mut cs = CheckSet::default();
    let ctx = AnalyticContext::new(fam, s)?;
    let grads = |make: fn(usize) -> Observable| -> Result<Vec<Gradient>, Error> {
        (1..=n).map(|k| ctx.evaluate(&make(k)).map(|x| x.1)).collect()
    };
    let h = grads(Observable::H)?;
    let e = grads(Observable::E)?;

    for k in 0..n {
        for l in k + 1..n {
            let (v, sc) = bracket_of(&h[k], &h[l]);
            cs.record("involution", scaled(v.norm(), sc), tol.identity);
        }
    }
    if n == 1 {
        cs.record("involution", 0.0, tol.identity);
    }

    let fd_h: Vec<Gradient> = (1..=n).map(|k| fd_gradient(&Observable::H(k), fam, s)).collect::<Result<_, _>>()?;
    let fd_e: Vec<Gradient> = (1..=n).map(|k| fd_gradient(&Observable::E(k), fam, s)).collect::<Result<_, _>>()?;
    for k in 0..n {
        for l in 0..n {
            let (a, sc) = bracket_of(&h[k], &e[l]);
            let (f, _) = bracket_of(&fd_h[k], &fd_e[l]);
            cs.record("route_agreement", scaled((a - f).norm(), sc), tol.route_agreement);
        }
    }

    let table = coefficient_bracket_poly(&FamilyNodes(fam), &PowerNodes, s)?;
    cs.record("coefficient_bracket", table.basic_residual, tol.identity);

    for k in 1..=n {
        let t = translation_check(k, fam, s)?;
        cs.record("translation", t.bracket_residual, tol.identity);
        cs.record("translation_double", t.double_bracket_residual, tol.route_agreement);
    }

    if !fam.is_goldfish() {
        return Ok(cs);
    }

    let r = r_bracket_check(fam, s)?;
    cs.record("r_bracket", r.node_residual, tol.identity);
    cs.record("he_symmetry", r.symmetry_residual, tol.identity_tight);

    let hv = &ctx.h_jet().values;
    for k in 0..n {
        let (v, sc) = bracket_of(&h[0], &e[k]);
        cs.record("h1_e_identity", scaled((v - hv[k]).norm(), sc.max(hv[k].norm())), tol.identity_tight);
    }

    for k in 0..=n {
        for l in 0..=n {
            let c = closure_identity_check(k, l, fam, s, BracketRoute::Analytic)?;
            if let Some(r) = c.closed_form {
                cs.record("closure_closed_form", r, tol.identity);
            }
            if let Some(r) = c.recursion {
                cs.record("closure_recursion", r, tol.identity);
            }
        }
    }

    for a in 1..=n {
        for b in a + 1..=n {
            let (_, g) = ctx.evaluate(&Observable::Lambda(a, b))?;
            let (v, sc) = bracket_of(&h[0], &g);
            cs.record("lambda_conservation", scaled(v.norm(), sc), tol.identity);
        }
    }

    let obs = observables(fam, s)?;
    let mats = (1..=n)
        .map(|k| build_a(k, &obs.h_extended()))
        .collect::<Result<Vec<_>, _>>()?;
    cs.record("structure_commutator", 0.0, tol.commutator);
    for k in 0..n {
        for l in k + 1..n {
            let c = commutator_check(&mats[k], &mats[l]);
            let scale = c.scale.max(1.0);
            cs.record("structure_commutator", c.norm / (scale * scale), tol.commutator);
        }
    }

    for alpha in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
        let ht = (1..=n)
            .map(|k| ctx.evaluate(&Observable::HTilde { k, alpha }).map(|x| x.1))
            .collect::<Result<Vec<_>, _>>()?;
        cs.record("tilde_involution", 0.0, tol.identity);
        for k in 0..n {
            for l in k + 1..n {
                let (v, sc) = bracket_of(&ht[k], &ht[l]);
                cs.record("tilde_involution", scaled(v.norm(), sc), tol.identity);
            }
        }
    }
    Ok(cs)
}

pub fn verify(cfg: ExperimentConfig) -> Result<Report, CliError> {
    let mut report = Report::new("verify", cfg.clone());
    let Some(fam) = family_checks(&cfg, &mut report)? else {
        return Ok(report.finish());
    };
    let states = cfg.sample_states();
    let results: Vec<Result<CheckSet, Error>> = report.timed("identities", || {
        states
            .par_iter()
            .map(|s| verify_sample(&fam, s, &cfg.tolerances))
            .collect()
    });
    let mut all = CheckSet::default();
    let mut failed_samples = 0;
    for (i, r) in results.iter().enumerate() {
        match r {
            Ok(cs) => all.merge(cs),
            Err(e) => {
                failed_samples += 1;
                report.error(e, json!({ "sample": i }));
            }
        }
    }
    report.extend(all);
    report.section(
        "samples",
        json!({ "count": states.len(), "failed": failed_samples, "family": fam.name(), "n": fam.n() }),
    );
    Ok(report.finish())
}

// -------------------------------------------------------------- simulate

/// Where the trajectory CSV goes: next to the report, or the working
/// directory when the report goes to stdout.
pub fn trajectory_path(report_path: Option<&Path>) -> PathBuf {
    match report_path {
        Some(p) => {
            let stem = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "report".into());
            p.with_file_name(format!("{stem}.trajectory.csv"))
        }
        None => PathBuf::from("trajectory.csv"),
    }
}

fn write_trajectory(traj: &Trajectory, path: &Path) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(traj.header())?;
    for row in traj.rows() {
        w.write_record(row.iter().map(|x| x.to_string()))?;
    }
    w.flush().map_err(|e| CliError::io(path.display(), e))?;
    Ok(())
}

/// Integrates the configured flow, turning core failures into diagnostics.
fn run_flow(spec: &FlowSpec, state: &PhaseState, report: &mut Report) -> Option<Trajectory> {
    match report.timed("integrate", || integrate(spec, state)) {
        Ok(t) => Some(t),
        Err(e) => {
            let data = match &e {
                Error::TrajectoryCollision {
                    time,
                    sample_index,
                    min_separation,
                } => json!({ "time": time, "row": sample_index, "min_separation": min_separation }),
                _ => Value::Null,
            };
            report.error(&e, data);
            None
        }
    }
}

/// Exact `(h, e)` at elapsed time `dt`, when a closed-form solver covers
/// the flow.
fn exact_solution(
    kind: &FlowKind,
    fam: &EtaFamily,
    initial: &ObservableSet,
    dt: f64,
) -> Option<Result<(Vec<C64>, Vec<C64>), Error>> {
    match kind {
        FlowKind::SingleH { k } if fam.is_goldfish() => {
            Some(exact_linear_flow(*k, initial, dt).map(|e| (initial.h.clone(), e)))
        }
        FlowKind::TildeH { k: 1, alpha } => Some(exact_tilde_flow(initial, *alpha, dt)),
        FlowKind::General { lambda, mu } => Some(exact_general_flow(initial, lambda, *mu, dt)),
        _ => None,
    }
}

/// Period of an isochronous flow, if the configured one is.
fn isochrony_period(kind: &FlowKind) -> Option<f64> {
    let rate = match kind {
        FlowKind::TildeH { alpha, .. } => *alpha,
        FlowKind::General { mu, .. } => *mu,
        FlowKind::SingleH { .. } => return None,
    };
    (rate.re == 0.0 && rate.im != 0.0).then(|| 2.0 * PI / rate.im.abs())
}

fn simulate_checks(
    spec: &FlowSpec,
    state: &PhaseState,
    traj: &Trajectory,
    tol: &Tolerances,
    report: &mut Report,
) -> Result<(), Error> {
    let fam = &spec.family;
    let n = fam.n();
    let t0 = spec.t_span.0;
    let obs0 = &traj.observables[0];

    for d in &traj.drift {
        report.check(format!("drift_{}", d.observable), d.max_drift, tol.drift);
    }

    let mut exact_dev = None;
    for (i, &t) in traj.times.iter().enumerate() {
        let Some(sol) = exact_solution(&spec.kind, fam, obs0, t - t0) else {
            break;
        };
        let (h, e) = sol?;
        let o = &traj.observables[i];
        let dev = rel_dev(&o.e, &e).max(rel_dev(&o.h, &h));
        exact_dev = Some(exact_dev.unwrap_or(0.0_f64).max(dev));
    }
    if let Some(dev) = exact_dev {
        report.check("exact_agreement", dev, tol.exact_agreement);
    }

    if fam.is_goldfish() && spec.kind == (FlowKind::SingleH { k: 1 }) {
        let p0 = family_polynomial(fam, state)?;
        let reduced = report.timed("reduced", || integrate_reduced(fam, &p0, &state.q, &traj.times))?;
        let (mut red, mut exact) = (0.0_f64, 0.0_f64);
        for (i, &t) in traj.times.iter().enumerate() {
            let q = &traj.states[i].q;
            red = red.max(multiset_deviation(&reduced[i], q)?);
            let roots = positions_from_e(&exact_goldfish(obs0, t - t0))?;
            exact = exact.max(multiset_deviation(&roots.roots, q)?);
        }
        report.check("oracle_reduced", red, tol.exact_agreement);
        report.check("oracle_exact", exact, tol.exact_agreement);
    }

    if let FlowKind::SingleH { k } = spec.kind {
        let slope = obs0.h_extended()[k - 1] * (n - k + 1) as f64;
        let p_start = obs0.total_momentum;
        let mut worst = 0.0_f64;
        for (o, &t) in traj.observables.iter().zip(&traj.times) {
            let want = p_start + slope * (t - t0);
            worst = worst.max(scaled((o.total_momentum - want).norm(), want.norm()));
        }
        report.check("translation_law", worst, tol.drift);

        if !fam.is_goldfish() {
            let m0 = beta_linear_closed_form(&state.q);
            let mut worst = 0.0_f64;
            for (s, &t) in traj.states.iter().zip(&traj.times) {
                let m = beta_linear_closed_form(&s.q);
                for l in 0..n {
                    let growth = if l + 1 == k { t - t0 } else { 0.0 };
                    worst = worst.max(scaled((m[l] - m0[l] - growth).norm(), m0[l].norm()));
                }
            }
            report.check("moment_growth", worst, tol.drift);
        }
    }

    let span = spec.t_span.1 - t0;
    match isochrony_period(&spec.kind) {
        Some(period) if span > 0.0 && ((span / period) - (span / period).round()).abs() < PERIOD_MATCH => {
            let last = traj.len() - 1;
            let o = &traj.observables[last];
            let obs_dev = rel_dev(&o.h, &obs0.h).max(rel_dev(&o.e, &obs0.e));
            let q_dev = multiset_deviation(&traj.states[last].q, &state.q)?;
            report.check("isochrony_observables", obs_dev, tol.isochrony);
            report.check("isochrony_positions", q_dev, tol.multiset);
            report.section("isochrony", json!({ "period": period, "periods": (span / period).round() }));
        }
        Some(period) => report.section(
            "isochrony",
            json!({ "period": period, "note": "time span is not a whole number of periods" }),
        ),
        None => {}
    }
    Ok(())
}

pub fn simulate(cfg: ExperimentConfig, report_path: Option<&Path>) -> Result<Report, CliError> {
    let mut report = Report::new("simulate", cfg.clone());
    let Some(fam) = family_checks(&cfg, &mut report)? else {
        return Ok(report.finish());
    };
    let spec = cfg.flow_spec(fam)?;
    let state = cfg.initial_state()?;
    let Some(traj) = run_flow(&spec, &state, &mut report) else {
        return Ok(report.finish());
    };
    let path = trajectory_path(report_path);
    write_trajectory(&traj, &path)?;
    report.artifacts.push(path.display().to_string());
    report.section(
        "trajectory",
        json!({
            "rows": traj.len(),
            "columns": traj.header(),
            "steps_accepted": traj.stats.accepted,
            "steps_rejected": traj.stats.rejected,
            "drift": traj.drift,
        }),
    );
    if let Err(e) = simulate_checks(&spec, &state, &traj, &cfg.tolerances, &mut report) {
        report.error(&e, Value::Null);
    }
    Ok(report.finish())
}

// -------------------------------------------------------------- separate

/// Separation constants, one particle at a time so every singular contour
/// is reported.
fn beta_per_particle(sep: &SeparationData, q: &[C64]) -> Result<Vec<C64>, Vec<(Error, Value)>> {
    let n = q.len();
    let mut total = vec![C64::new(0.0, 0.0); n];
    let mut failures = Vec::new();
    for k in 0..n {
        let mut single = vec![C64::new(0.0, 0.0); n];
        single[k] = q[k];
        match beta_constants(sep, &single) {
            Ok(b) => total.iter_mut().zip(b).for_each(|(t, x)| *t += x),
            Err(Error::ContourSingularity {
                singular_point, distance, ..
            }) => failures.push((
                Error::ContourSingularity {
                    index: k,
                    singular_point,
                    distance,
                },
                json!({ "k": k + 1, "endpoint": q[k], "singular_point": singular_point, "distance": distance }),
            )),
            Err(e) => failures.push((e, json!({ "k": k + 1 }))),
        }
    }
    if failures.is_empty() {
        Ok(total)
    } else {
        Err(failures)
    }
}

pub fn separate(cfg: ExperimentConfig) -> Result<Report, CliError> {
    let mut report = Report::new("separate", cfg.clone());
    let Some(fam) = family_checks(&cfg, &mut report)? else {
        return Ok(report.finish());
    };
    let spec = cfg.flow_spec(fam.clone())?;
    let FlowKind::SingleH { k } = spec.kind else {
        return Err(CliError::Config("separate needs a single_h flow".into()));
    };
    let state = cfg.initial_state()?;
    let tol = cfg.tolerances;
    let n = fam.n();
    let t0 = spec.t_span.0;

    let sep = match SeparationData::new(&fam, &state) {
        Ok(s) => s,
        Err(e) => {
            report.error(&e, Value::Null);
            return Ok(report.finish());
        }
    };
    let beta0 = match report.timed("beta", || beta_per_particle(&sep, &state.q)) {
        Ok(b) => b,
        Err(failures) => {
            for (e, data) in &failures {
                report.error(e, data.clone());
            }
            return Ok(report.finish());
        }
    };
    report.section("beta_t0", &beta0);

    if !fam.is_goldfish() {
        let cf = beta_linear_closed_form(&state.q);
        report.check("beta_closed_form", rel_dev(&beta0, &cf), tol.beta_closed_form);
    }
    match report.timed("hamilton_jacobi", || hamilton_jacobi_check(&sep, &state.q)) {
        Ok(hj) => report.check("hamilton_jacobi", hj.residual, tol.hamilton_jacobi),
        Err(e) => report.error(&e, Value::Null),
    }

    let Some(traj) = run_flow(&spec, &state, &mut report) else {
        return Ok(report.finish());
    };
    let scale = beta0.iter().map(|x| x.norm()).fold(1.0, f64::max);
    let path: Vec<Vec<C64>> = traj.states.iter().map(|s| s.q.clone()).collect();
    match report.timed("beta_drift", || track_beta(&sep, &path)) {
        Ok(track) => {
            let mut drift = vec![0.0_f64; n];
            for (b, &t) in track.values.iter().zip(&traj.times) {
                for l in 0..n {
                    let shift = if l + 1 == k { t - t0 } else { 0.0 };
                    drift[l] = drift[l].max((b[l] - beta0[l] - shift).norm() / scale);
                }
            }
            report.check("beta_drift", drift.iter().copied().fold(0.0, f64::max), tol.beta_drift);
            report.section("beta_drift", &drift);
            for c in &track.crossings {
                report.diagnose(
                    Level::Note,
                    "contour_period",
                    format!("contour {} swept the zero {} of P0; its period was added back", c.k + 1, c.pole),
                    json!({ "row": c.sample, "k": c.k + 1, "pole": c.pole, "orientation": c.orientation }),
                );
            }
        }
        Err(e) => report.error(&e, Value::Null),
    }
    let mut invariant = 0.0_f64;
    for s in &traj.states {
        match momentum_recovery_check(&sep, s) {
            Ok(m) => invariant = invariant.max(m.residual),
            Err(e) => {
                report.error(&e, Value::Null);
                break;
            }
        }
    }
    report.check("invariant_curve", invariant, tol.recovery);

    let path: Vec<Vec<C64>> = traj.states.iter().map(|s| s.q.clone()).collect();
    match track_momenta(&sep, &path, &state.p) {
        Ok(ps) => {
            let worst = ps
                .iter()
                .zip(&traj.states)
                .map(|(p, s)| rel_dev(p, &s.p))
                .fold(0.0, f64::max);
            report.check("momentum_recovery", worst, tol.recovery);
        }
        Err(e) => report.error(&e, Value::Null),
    }
    Ok(report.finish())
}

// -------------------------------------------------------------- superint

pub fn superint(cfg: ExperimentConfig) -> Result<Report, CliError> {
    let mut report = Report::new("superint", cfg.clone());
    let Some(fam) = family_checks(&cfg, &mut report)? else {
        return Ok(report.finish());
    };
    fam.require_goldfish("superint").map_err(config_error)?;
    let spec = cfg.flow_spec(fam.clone())?;
    let FlowKind::SingleH { k } = spec.kind else {
        return Err(CliError::Config("superint needs a single_h flow".into()));
    };
    let state = cfg.initial_state()?;
    let tol = cfg.tolerances;
    let n = fam.n();

    let si = match superintegrals(k, &fam, &state) {
        Ok(s) => s,
        Err(e) => {
            report.error(&e, Value::Null);
            return Ok(report.finish());
        }
    };
    report.section("lambda", &si.lambda);
    match (&si.phi, k) {
        (Ok(phi), _) => report.section("phi", json!({ "available": true, "values": phi })),
        (Err(_), 1) => report.section(
            "phi",
            json!({ "available": false, "reason": "k = 1: the lambda table carries the extra integrals" }),
        ),
        (Err(e), _) => {
            report.diagnose(Level::Note, "zero_denominator", e.to_string(), json!({ "state": "initial" }));
            report.section("phi", json!({ "available": false, "reason": e.to_string() }));
        }
    }

    if let Some(traj) = run_flow(&spec, &state, &mut report) {
        let mut worst = 0.0_f64;
        for (i, s) in traj.states.iter().enumerate() {
            let cur = match superintegrals(k, &fam, s) {
                Ok(c) => c,
                Err(e) => {
                    report.error(&e, json!({ "row": i }));
                    continue;
                }
            };
            if k == 1 {
                for a in 0..n {
                    worst = worst.max(rel_dev(&cur.lambda[a], &si.lambda[a]));
                }
            } else if let (Ok(p), Ok(p0)) = (&cur.phi, &si.phi) {
                worst = worst.max(rel_dev(p, p0));
            } else if let Err(e) = &cur.phi {
                report.diagnose(Level::Note, "zero_denominator", e.to_string(), json!({ "row": i }));
            }
        }
        let name = if k == 1 { "lambda_drift" } else { "phi_drift" };
        report.check(name, worst, tol.superint_drift);
    }

    let mut states = vec![state];
    states.extend(cfg.sample_states());
    let ranks: Vec<Result<usize, Error>> = report.timed("rank", || {
        states
            .par_iter()
            .map(|s| jacobian_rank(&fam, s).map(|r| r.rank))
            .collect()
    });
    let expected = 2 * n - 1;
    let mut deficit = 0usize;
    let mut table = Vec::with_capacity(ranks.len());
    for (i, r) in ranks.into_iter().enumerate() {
        match r {
            Ok(rank) => {
                deficit = deficit.max(rank.abs_diff(expected));
                table.push(Some(rank));
            }
            Err(e) => {
                report.error(&e, json!({ "state": i }));
                table.push(None);
            }
        }
    }
    report.check("jacobian_rank", deficit as f64, 0.0);
    report.section(
        "rank",
        json!({ "expected": expected, "initial": table[0], "samples": &table[1..] }),
    );
    Ok(report.finish())
}
