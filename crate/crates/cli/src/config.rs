// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration: one JSON document, unknown keys rejected.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use goldfish_core::flow::{FlowKind, FlowSpec};
use goldfish_core::hamfam::{
    builtin_family, Eta, EtaFamily, FamilyConsistency, FamilyKind, FnEta, PhaseState, SampleDomain,
};
use goldfish_core::sampling::{random_state, rng};
use goldfish_core::C64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyConfig {
    pub name: String,
    /// Added to every member's inverse; a nonzero value deliberately breaks
    /// the family, for negative-control runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse_offset: Option<C64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    #[serde(default = "default_kind")]
    pub kind: String,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<C64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Vec<C64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<C64>,
    #[serde(default = "default_span")]
    pub t_span: (f64, f64),
    #[serde(default = "default_samples")]
    pub sample_count: usize,
}

fn default_kind() -> String {
    "single_h".into()
}

fn default_k() -> usize {
    1
}

fn default_span() -> (f64, f64) {
    (0.0, 1.0)
}

fn default_samples() -> usize {
    11
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            kind: default_kind(),
            k: default_k(),
            alpha: None,
            lambda: None,
            mu: None,
            t_span: default_span(),
            sample_count: default_samples(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateConfig {
    pub p: Vec<C64>,
    pub q: Vec<C64>,
}

/// Acceptance thresholds; every field may be overridden and must stay
/// positive.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Structural bracket identities, scaled residuals.
    pub identity: f64,
    /// `{h_1, e_k} = h_k`.
    pub identity_tight: f64,
    /// Analytic against finite-difference gradients, relative.
    pub route_agreement: f64,
    /// Structure-matrix commutators, relative to `scale^2`.
    pub commutator: f64,
    /// Drift of conserved quantities along integrated flows.
    pub drift: f64,
    /// Exact against integrated solutions.
    pub exact_agreement: f64,
    /// Drift of the separation constants.
    pub beta_drift: f64,
    /// Return of coefficients after one isochrony period.
    pub isochrony: f64,
    /// Return of positions (as a multiset) after one isochrony period.
    pub multiset: f64,
    /// Momentum recovery along trajectories.
    pub recovery: f64,
    /// Linear-family separation constants against their closed form.
    pub beta_closed_form: f64,
    /// Action gradient against the recovered momenta.
    pub hamilton_jacobi: f64,
    /// Drift of the superintegrals along the flow.
    pub superint_drift: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            identity: 1e-8,
            identity_tight: 1e-10,
            route_agreement: 1e-6,
            commutator: 1e-12,
            drift: 1e-8,
            exact_agreement: 1e-6,
            beta_drift: 1e-6,
            isochrony: 1e-7,
            multiset: 1e-6,
            recovery: 1e-7,
            beta_closed_form: 1e-10,
            hamilton_jacobi: 1e-6,
            superint_drift: 1e-6,
        }
    }
}

impl Tolerances {
    fn validate(&self) -> Result<(), CliError> {
        let v = serde_json::to_value(self).expect("tolerances serialize");
        for (name, x) in v.as_object().expect("struct") {
            let x = x.as_f64().unwrap_or(f64::NAN);
            if !(x > 0.0 && x.is_finite()) {
                return Err(CliError::Config(format!("tolerance `{name}` must be positive, got {x}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub family: FamilyConfig,
    pub n: usize,
    #[serde(default)]
    pub flow: FlowConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sample_states")]
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<StateConfig>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputConfig>,
}

fn default_sample_states() -> usize {
    10
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.n == 0 {
            return Err(CliError::Config("n must be at least 1".into()));
        }
        self.tolerances.validate()?;
        if let Some(s) = &self.initial_state {
            if s.p.len() != self.n || s.q.len() != self.n {
                return Err(CliError::Config(format!(
                    "initial_state needs {} momenta and positions, got {} and {}",
                    self.n,
                    s.p.len(),
                    s.q.len()
                )));
            }
        }
        self.family()?;
        Ok(())
    }

    /// The configured family with its registration residuals. A family
    /// that fails registration comes back with `family: None`.
    pub fn family(&self) -> Result<FamilySetup, CliError> {
        let kind: FamilyKind = self
            .family
            .name
            .parse()
            .map_err(|e: goldfish_core::Error| CliError::Config(e.to_string()))?;
        let offset = self.family.inverse_offset.unwrap_or_default();
        let domain = SampleDomain::default();
        if offset.norm() == 0.0 {
            let family = builtin_family(&self.family.name, self.n).map_err(|e| CliError::Config(e.to_string()))?;
            let (consistency, rejection) = family.consistency(domain);
            return Ok(FamilySetup {
                family: rejection.is_none().then_some(family),
                consistency,
                rejection,
            });
        }
        let member: Arc<dyn Eta> = match kind {
            FamilyKind::Goldfish => Arc::new(FnEta {
                value: |p: C64| p.exp(),
                derivative: |p: C64| p.exp(),
                inverse: move |x: C64| x.ln() + offset,
            }),
            FamilyKind::Linear => Arc::new(FnEta {
                value: |p: C64| p,
                derivative: |_| C64::new(1.0, 0.0),
                inverse: move |x: C64| x + offset,
            }),
            FamilyKind::Custom => unreachable!("not parseable from a name"),
        };
        let members = vec![member; self.n];
        let (consistency, rejection) = EtaFamily::member_consistency(&members, domain);
        let family = match rejection {
            Some(_) => None,
            None => Some(
                EtaFamily::custom(format!("{}+offset", self.family.name), members, domain)
                    .map_err(|e| CliError::Config(e.to_string()))?,
            ),
        };
        Ok(FamilySetup {
            family,
            consistency,
            rejection,
        })
    }

    pub fn flow_spec(&self, family: EtaFamily) -> Result<FlowSpec, CliError> {
        let f = &self.flow;
        let missing = |what: &str| CliError::Config(format!("flow kind `{}` needs `{what}`", f.kind));
        let kind = match f.kind.as_str() {
            "single_h" => FlowKind::SingleH { k: f.k },
            "tilde_h" => FlowKind::TildeH {
                k: f.k,
                alpha: f.alpha.ok_or_else(|| missing("alpha"))?,
            },
            "general" => FlowKind::General {
                lambda: f.lambda.clone().ok_or_else(|| missing("lambda"))?,
                mu: f.mu.ok_or_else(|| missing("mu"))?,
            },
            other => return Err(CliError::Config(format!("unknown flow kind `{other}`"))),
        };
        FlowSpec::new(kind, family, f.t_span, f.sample_count).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Explicit initial state, or the first seeded random state.
    pub fn initial_state(&self) -> Result<PhaseState, CliError> {
        match &self.initial_state {
            Some(s) => PhaseState::new(s.p.clone(), s.q.clone()).map_err(|e| CliError::Config(e.to_string())),
            None => Ok(random_state(&mut rng(self.seed), self.n)),
        }
    }

    /// `samples` seeded random states.
    pub fn sample_states(&self) -> Vec<PhaseState> {
        let mut g = rng(self.seed);
        (0..self.samples).map(|_| random_state(&mut g, self.n)).collect()
    }
}

pub struct FamilySetup {
    pub family: Option<EtaFamily>,
    pub consistency: FamilyConsistency,
    pub rejection: Option<goldfish_core::Error>,
}
