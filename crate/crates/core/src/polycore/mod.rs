// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

//! Complex polynomial arithmetic, interpolation, root extraction and
//! root-trajectory matching.

mod interp;
mod matching;
mod poly;
mod roots;

pub use interp::{
    check_separation, interpolate, interpolation_residual, min_separation, LagrangeBasis,
    NodeValueSet,
};
pub use matching::{hungarian, match_roots, RootMatch};
pub use poly::{elementary_sym, elementary_sym_newton, monic_from_roots, Polynomial};
pub use roots::{reconstruction_residual, roots, RootSet};
