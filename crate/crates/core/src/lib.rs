// Copyright 2026 The rydberg-cz Contributors
// SPDX-License-Identifier: Apache-2.0

//! Robust CZ gates for Rydberg-blockaded atom pairs.
//!
//! * [`pulse`]: control trajectories, gate configuration, pulse files.
//! * [`dynamics`]: sector Hamiltonians, propagation, parameter sensitivities.
//! * [`fidelity`]: Bell fidelity, CPHASE angle, Rydberg time, robustness sweeps.
//! * [`optimizer`]: augmented-Lagrangian pulse synthesis with derivative-method
//!   robustness.
//! * [`atomic`]: single-channel quantum-defect theory for Rydberg series.
//! * [`staterank`]: fidelity of a fixed pulse across principal quantum numbers
//!   and stray fields.

pub mod atomic;
pub mod dynamics;
pub mod error;
pub mod fidelity;
pub mod optimizer;
pub mod pulse;
pub mod staterank;

pub use error::{Error, Result};

/// Guide chapters, compiled as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/pulses.md")]
    mod pulses {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/fidelity.md")]
    mod fidelity {}
    #[doc = include_str!("../../../book/src/optimizer.md")]
    mod optimizer {}
    #[doc = include_str!("../../../book/src/atomic.md")]
    mod atomic {}
    #[doc = include_str!("../../../book/src/staterank.md")]
    mod staterank {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
