// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

pub mod error;
pub mod flow;
pub mod hamfam;
pub mod linalg;
pub mod ode;
pub mod poisson;
pub mod polycore;
pub mod quadrature;
pub mod sampling;
pub mod sepvar;
pub mod tolerance;

pub use error::{Error, Result};

/// Complex double, the scalar type of the whole phase space.
pub type C64 = num_complex::Complex64;
