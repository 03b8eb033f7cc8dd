// Copyright 2026 The rydberg-cz Contributors
// SPDX-License-Identifier: Apache-2.0

//! CODATA 2018 constants in atomic units, plus SI conversions.

use serde::{Deserialize, Serialize};

/// Fine-structure constant.
pub const ALPHA: f64 = 7.297_352_5693e-3;
/// Speed of light in atomic units (`1/α`).
pub const C_AU: f64 = 137.035_999_084;
/// Boltzmann constant in Hartree per kelvin.
pub const K_B_HARTREE: f64 = 3.166_811_563e-6;
/// Hartree energy as a frequency (Hz).
pub const HARTREE_HZ: f64 = 6.579_683_920_502e15;
/// Atomic unit of time (s).
pub const TIME_AU: f64 = 2.418_884_326_5857e-17;
/// Atomic unit of electric field (V/m).
pub const FIELD_AU: f64 = 5.142_206_747_63e11;
/// Bohr radius (m).
pub const BOHR: f64 = 5.291_772_109_03e-11;
/// Inverse centimetres per Hartree.
pub const HARTREE_CM: f64 = 219_474.631_363_20;

/// Physical constants used by the width formulas, with the radiation
/// temperature as the only adjustable entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constants {
    pub alpha: f64,
    pub c: f64,
    /// Temperature of the radiation field (K).
    pub temperature: f64,
}

impl Default for Constants {
    fn default() -> Self {
        Self::at_temperature(300.0)
    }
}

impl Constants {
    pub fn at_temperature(temperature: f64) -> Self {
        Self {
            alpha: ALPHA,
            c: C_AU,
            temperature,
        }
    }

    /// `k_B T` in Hartree.
    pub fn k_b_t(&self) -> f64 {
        K_B_HARTREE * self.temperature
    }

    /// Mean photon occupation `1/(e^{|ω|/k_B T} - 1)`; zero at `T = 0`.
    pub fn occupation(&self, omega: f64) -> f64 {
        let kt = self.k_b_t();
        if kt <= 0.0 {
            return 0.0;
        }
        1.0 / (omega.abs() / kt).exp_m1()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn literal_values() {
        assert_eq!(ALPHA, 0.0072973525693);
        assert_eq!(C_AU, 137.035999084);
        assert!((ALPHA * C_AU - 1.0).abs() < 1e-10);
        assert_eq!(K_B_HARTREE, 0.000003166811563);
        let c = Constants::default();
        assert!((c.k_b_t() - 9.500434689e-4).abs() < 1e-12);
    }

    #[test]
    fn occupation_limits() {
        assert_eq!(Constants::at_temperature(0.0).occupation(1e-3), 0.0);
        let c = Constants::default();
        // Rayleigh-Jeans regime
        let w = 1e-8;
        assert!((c.occupation(w) * w / c.k_b_t() - 1.0).abs() < 1e-4);
    }
}
