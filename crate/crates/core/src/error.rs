// Copyright 2026 The goldfish-lab Authors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("degenerate configuration: node separation {min_separation:e} below {tolerance:e}")]
    DegenerateConfiguration { min_separation: f64, tolerance: f64 },

    #[error("polynomial has zero leading coefficient")]
    ZeroLeadingCoefficient,

    #[error("root reconstruction residual {residual:e} exceeds {tolerance:e}")]
    RootAccuracy { residual: f64, tolerance: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown family `{0}`")]
    UnknownFamily(String),

    #[error("{operation} requires the goldfish family, got `{family}`")]
    UnsupportedFamily {
        operation: &'static str,
        family: String,
    },

    #[error("family member {member} fails its {check} check at p = {point}: residual {residual:e}")]
    InconsistentFamily {
        member: usize,
        check: &'static str,
        point: Complex64,
        residual: f64,
    },

    #[error("unknown observable `{0}`")]
    UnknownObservable(String),

    #[error("index {index} out of range for N = {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("trajectory collision at t = {time} (sample row {sample_index}): separation {min_separation:e}")]
    TrajectoryCollision {
        time: f64,
        sample_index: usize,
        min_separation: f64,
    },

    #[error("step size underflow at t = {time}: h = {step:e}")]
    StepSizeUnderflow { time: f64, step: f64 },

    #[error("branch ambiguity for coordinate {index} at value {value}")]
    BranchAmbiguity { index: usize, value: Complex64 },

    #[error("deformation parameter is zero; use the undeformed exact solution")]
    ZeroDeformation,

    #[error("h1 vanishes at the initial state; ratios h_k/h_1 are undefined")]
    ZeroH1,

    #[error("superintegral denominator h_{index} vanishes")]
    ZeroDenominator { index: usize },

    #[error("contour 0 -> q_{index} passes within {distance:e} of singular point {singular_point}")]
    ContourSingularity {
        index: usize,
        singular_point: Complex64,
        distance: f64,
    },

    #[error("quadrature failed on contour {index}: error estimate {estimated_error:e}")]
    QuadratureFailure { index: usize, estimated_error: f64 },
}
