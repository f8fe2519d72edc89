// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

//! Poisson brackets by analytic gradients and by finite differences, the
//! structural identity checks, and the goldfish structure matrices.

mod gradient;
mod identities;
mod structure;

pub use gradient::{
    bracket, bracket_of, bracket_scaled, coefficient_jet, finite_difference_gradient, gradient,
    observable_value, AnalyticContext, BracketRoute, CoefficientJet, DeformedNodes, FamilyNodes,
    FixedNodes, Gradient, NodeJet, NodeValues, Observable, PowerNodes,
};
pub use identities::{
    closure_identity_check, coefficient_bracket_poly, r_bracket_check, translation_check,
    ClosureResidual, CoefficientBracketTable, RBracketReport, TranslationResidual,
};
pub use structure::{
    build_a, closure_rhs, closure_terms, commutator_check, evaluate_terms, structure_table,
    ClosureTerm, CommutatorCheck, StructureMatrix, StructureTable,
};
