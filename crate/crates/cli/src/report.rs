// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

//! Versioned report document shared by all subcommands.

use std::collections::BTreeMap;
use std::io::Write;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    pub fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            residual,
            tolerance,
            // NaN residuals fail
            passed: residual <= tolerance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Error,
    Note,
}

#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic {
    pub level: Level,
    pub kind: String,
    pub message: String,
    #[serde(skip_serializing_if = "Value::is_null")]
    pub data: Value,
}

/// Worst residual per named check, in first-seen order.
#[derive(Debug, Clone, Default)]
pub struct CheckSet {
    entries: Vec<(String, f64, f64)>,
}

impl CheckSet {
    pub fn record(&mut self, name: &str, residual: f64, tolerance: f64) {
        match self.entries.iter_mut().find(|e| e.0 == name) {
            Some(e) => {
                if !(residual <= e.1) {
                    e.1 = residual;
                }
            }
            None => self.entries.push((name.to_string(), residual, tolerance)),
        }
    }

    pub fn merge(&mut self, other: &CheckSet) {
        for (name, r, t) in &other.entries {
            self.record(name, *r, *t);
        }
    }

    pub fn into_checks(self) -> Vec<Check> {
        self.entries
            .into_iter()
            .map(|(n, r, t)| Check::new(n, r, t))
            .collect()
    }
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub schema: u32,
    pub command: &'static str,
    pub config: ExperimentConfig,
    pub checks: Vec<Check>,
    pub sections: BTreeMap<String, Value>,
    pub artifacts: Vec<String>,
    pub diagnostics: Vec<Diagnostic>,
    pub passed: bool,
    /// Wall-clock seconds per section; the only nondeterministic field.
    pub timing: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(command: &'static str, config: ExperimentConfig) -> Self {
        Self {
            schema: SCHEMA,
            command,
            config,
            checks: Vec::new(),
            sections: BTreeMap::new(),
            artifacts: Vec::new(),
            diagnostics: Vec::new(),
            passed: false,
            timing: BTreeMap::new(),
        }
    }

    pub fn check(&mut self, name: impl Into<String>, residual: f64, tolerance: f64) {
        self.checks.push(Check::new(name, residual, tolerance));
    }

    pub fn extend(&mut self, set: CheckSet) {
        self.checks.extend(set.into_checks());
    }

    pub fn section(&mut self, name: &str, value: impl Serialize) {
        let v = serde_json::to_value(value).expect("section values serialize");
        self.sections.insert(name.to_string(), v);
    }

    pub fn diagnose(&mut self, level: Level, kind: &str, message: impl Into<String>, data: Value) {
        self.diagnostics.push(Diagnostic {
            level,
            kind: kind.to_string(),
            message: message.into(),
            data,
        });
    }

    pub fn error(&mut self, err: &goldfish_core::Error, data: Value) {
        self.diagnose(Level::Error, error_kind(err), err.to_string(), data);
    }

    /// Runs `f`, recording its wall-clock time under `name`.
    pub fn timed<T>(&mut self, name: &str, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        *self.timing.entry(name.to_string()).or_default() += start.elapsed().as_secs_f64();
        out
    }

    /// Fixes the overall verdict: every check passed and no error was
    /// diagnosed.
    pub fn finish(mut self) -> Self {
        self.passed = self.checks.iter().all(|c| c.passed)
            && !self.diagnostics.iter().any(|d| d.level == Level::Error);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Checks table as CSV.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), CliError> {
        let mut w = csv::Writer::from_writer(out);
        for c in &self.checks {
            w.serialize(c)?;
        }
        w.flush().map_err(|e| CliError::io("csv output", e))?;
        Ok(())
    }

    /// One line per check for humans.
    pub fn summary(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let verdict = if c.passed { "PASS" } else { "FAIL" };
            s.push_str(&format!(
                "{verdict} {:<28} residual={:.3e} tolerance={:.1e}\n",
                c.name, c.residual, c.tolerance
            ));
        }
        for d in &self.diagnostics {
            let level = match d.level {
                Level::Error => "ERROR",
                Level::Note => "NOTE",
            };
            s.push_str(&format!("{level} {}: {}\n", d.kind, d.message));
        }
        s.push_str(if self.passed { "overall: PASS\n" } else { "overall: FAIL\n" });
        s
    }
}

/// Stable snake_case tag for a core error.
pub fn error_kind(err: &goldfish_core::Error) -> &'static str {
    use goldfish_core::Error::*;
    match err {
        DegenerateConfiguration { .. } => "degenerate_configuration",
        ZeroLeadingCoefficient => "zero_leading_coefficient",
        RootAccuracy { .. } => "root_accuracy",
        DimensionMismatch { .. } => "dimension_mismatch",
        UnknownFamily(_) => "unknown_family",
        UnsupportedFamily { .. } => "unsupported_family",
        InconsistentFamily { .. } => "inconsistent_family",
        UnknownObservable(_) => "unknown_observable",
        IndexOutOfRange { .. } => "index_out_of_range",
        InvalidInput(_) => "invalid_input",
        TrajectoryCollision { .. } => "trajectory_collision",
        StepSizeUnderflow { .. } => "step_size_underflow",
        BranchAmbiguity { .. } => "branch_ambiguity",
        ZeroDeformation => "zero_deformation",
        ZeroH1 => "zero_h1",
        ZeroDenominator { .. } => "zero_denominator",
        ContourSingularity { .. } => "contour_singularity",
        QuadratureFailure { .. } => "quadrature_failure",
    }
}
