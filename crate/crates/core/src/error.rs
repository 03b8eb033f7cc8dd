// Copyright 2026 The rydberg-cz Contributors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An accumulated control left its allowed interval.
    #[error("{quantity} = {value} at step {step} violates bound {bound}")]
    BoundViolation {
        step: usize,
        quantity: &'static str,
        value: f64,
        bound: f64,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Malformed input file. `context` names the line/field when known.
    #[error("parse error in {path}: {context}")]
    Parse { path: PathBuf, context: String },

    #[error("unsupported file version {found} (expected {expected})")]
    Version { found: i64, expected: i64 },

    /// Fields that parse individually but disagree with each other.
    #[error("inconsistent data: {0}")]
    Consistency(String),

    #[error("non-finite numeric input: {0}")]
    NumericInput(String),

    /// Numerical blow-up during an iterative computation.
    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("dipole-forbidden pair: {0}")]
    SelectionRule(String),

    #[error("level ordering error: {0}")]
    Ordering(String),

    #[error("radial integration failed: {0}")]
    Integration(String),

    #[error("fit failed: {0}")]
    Fit(String),

    /// Stark shifts that are not quadratic in the field over the requested axis.
    #[error("field axis leaves the quadratic regime (R^2 = {r_squared:.6}); use smaller fields")]
    NonQuadratic { r_squared: f64 },

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
