// Copyright 2026 The rydberg-cz Contributors
// SPDX-License-Identifier: Apache-2.0

//! Figures of merit for a CZ pulse.
//!
//! The gate acts diagonally on the computational basis (up to leakage), so a
//! single input `|++⟩` probes all four amplitudes at once. The Bell fidelity
//! is the overlap of the output with `CZ|++⟩`, maximized over a common
//! single-qubit Z rotation `θ` applied to both atoms. Norm lost to Rydberg
//! decay counts fully as infidelity.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::dynamics::{propagate, Offsets, TrajectoryRecord};
use crate::error::{Error, Result};
use crate::pulse::{GateConfig, Pulse};

const SCAN_POINTS: usize = 1024;
const REFINE_STEPS: usize = 50;

/// Wraps an angle into `(-π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let mut y = x.rem_euclid(TAU);
    if y > PI {
        y -= TAU;
    }
    y
}

/// Summary of one gate evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityReport {
    /// Bell-state fidelity in `[0, 1]`.
    pub f: f64,
    /// Single-qubit Z correction attaining `f` (radians).
    pub theta_opt: f64,
    /// CPHASE angle `φ11 - 2 φ01`, wrapped to `(-π, π]`.
    pub phi: f64,
    /// `2 P01 + P11 + 1`; equals 4 when every input returns.
    pub p_tot: f64,
    /// `(2 T01 + T11) / 3` in `1/Ω_max`.
    pub t_bar_r: f64,
}

impl FidelityReport {
    pub fn infidelity(&self) -> f64 {
        1.0 - self.f
    }

    /// Distance of the CPHASE angle from π, wrapped to `(-π, π]`.
    pub fn phase_error(&self) -> f64 {
        wrap_angle(self.phi - PI)
    }
}

/// `|c0 + e^{iθ} c1 + e^{2iθ} c2|²` and its θ-derivative.
fn overlap_sq(c: &[C64; 3], theta: f64) -> (f64, f64) {
    let e1 = C64::from_polar(1.0, theta);
    let e2 = e1 * e1;
    let g = c[0] + e1 * c[1] + e2 * c[2];
    let dg = C64::i() * (e1 * c[1] + 2.0 * e2 * c[2]);
    (g.norm_sqr(), 2.0 * (g.conj() * dg).re)
}

/// Bell fidelity of the output state `Σ c_β |β⟩` produced from `|++⟩`,
/// against `CZ|++⟩ = (|00⟩ + |01⟩ + |10⟩ - |11⟩)/2`.
///
/// Returns `(F, θ)` where `θ` maximizes
/// `|c00 + e^{iθ}(c01 + c10) - e^{2iθ} c11|² / 4`: a uniform 1024-point scan
/// followed by bisection on the derivative.
pub fn bell_fidelity(c00: C64, c01: C64, c10: C64, c11: C64) -> (f64, f64) {
    let c = [c00, c01 + c10, -c11];
    let mut best = (f64::NEG_INFINITY, 0.0);
    let h = TAU / SCAN_POINTS as f64;
    for j in 0..SCAN_POINTS {
        let theta = -PI + h * (j + 1) as f64;
        let (v, _) = overlap_sq(&c, theta);
        if v > best.0 {
            best = (v, theta);
        }
    }
    let (mut lo, mut hi) = (best.1 - h, best.1 + h);
    if overlap_sq(&c, lo).1 >= 0.0 && overlap_sq(&c, hi).1 <= 0.0 {
        for _ in 0..REFINE_STEPS {
            let mid = 0.5 * (lo + hi);
            if overlap_sq(&c, mid).1 > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let theta = 0.5 * (lo + hi);
        let (v, _) = overlap_sq(&c, theta);
        if v > best.0 {
            best = (v, theta);
        }
    }
    let f = (best.0 / 4.0).clamp(0.0, 1.0);
    (f, wrap_angle(best.1))
}

/// Builds the report from a finished trajectory (no offsets applied here).
pub fn report_from_trajectory(rec: &TrajectoryRecord) -> FidelityReport {
    let a01 = rec.psi01.0[0];
    let a11 = rec.psi11.0[0];
    let half = C64::new(0.5, 0.0);
    let (f, theta_opt) = bell_fidelity(half, a01 * half, a01 * half, a11 * half);
    FidelityReport {
        f,
        theta_opt,
        phi: wrap_angle(rec.phi11 - 2.0 * rec.phi01),
        p_tot: 2.0 * a01.norm_sqr() + a11.norm_sqr() + 1.0,
        t_bar_r: rydberg_time(rec),
    }
}

/// Average integrated Rydberg time `(2 T01 + T11) / 3`; `|00⟩` never leaves
/// the computational space and is excluded.
pub fn rydberg_time(rec: &TrajectoryRecord) -> f64 {
    (2.0 * rec.t_r01 + rec.t_r11) / 3.0
}

/// Propagates both sectors with the given offsets and assembles the report.
pub fn evaluate(pulse: &Pulse, config: &GateConfig, offsets: Offsets) -> Result<FidelityReport> {
    let rec = propagate(pulse, config, offsets, false, false)?;
    Ok(report_from_trajectory(&rec))
}

/// Fidelity on a grid of `(δΩ, δΔ)` offsets.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub d_omega_axis: Vec<f64>,
    pub d_delta_axis: Vec<f64>,
    /// `values[i][j]` at `(d_omega_axis[i], d_delta_axis[j])`.
    pub values: Vec<Vec<f64>>,
}

impl SweepGrid {
    /// Header row of δΔ values, first column δΩ, body F; 9 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("d_omega\\d_delta");
        for d in &self.d_delta_axis {
            write!(out, ",{d:.8e}").unwrap();
        }
        out.push('\n');
        for (w, row) in self.d_omega_axis.iter().zip(&self.values) {
            write!(out, "{w:.8e}").unwrap();
            for f in row {
                write!(out, ",{f:.8e}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

fn is_monotone(axis: &[f64]) -> bool {
    axis.windows(2).all(|w| w[1] > w[0]) || axis.windows(2).all(|w| w[1] < w[0])
}

/// Evaluates the fidelity at every grid cell. Cells run in parallel; the
/// result does not depend on scheduling.
pub fn sweep(
    pulse: &Pulse,
    config: &GateConfig,
    d_omega_axis: &[f64],
    d_delta_axis: &[f64],
) -> Result<SweepGrid> {
    if d_omega_axis.is_empty() || d_delta_axis.is_empty() {
        return Err(Error::InvalidArgument(
            "sweep axes must be non-empty".into(),
        ));
    }
    if !is_monotone(d_omega_axis) || !is_monotone(d_delta_axis) {
        return Err(Error::InvalidArgument(
            "sweep axes must be strictly monotone".into(),
        ));
    }
    let values = d_omega_axis
        .par_iter()
        .map(|&dw| {
            d_delta_axis
                .iter()
                .map(|&dd| evaluate(pulse, config, Offsets::new(dw, dd)).map(|r| r.f))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepGrid {
        d_omega_axis: d_omega_axis.to_vec(),
        d_delta_axis: d_delta_axis.to_vec(),
        values,
    })
}

/// `n` evenly spaced points on `[lo, hi]` (just `lo` when `n == 1`).
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn exact_cz_output() {
        let (f, theta) = bell_fidelity(c(0.5), c(0.5), c(0.5), c(-0.5));
        assert!((f - 1.0).abs() < 1e-15);
        assert!(theta.abs() < 1e-12);
    }

    #[test]
    fn identity_gate_gives_one_half() {
        // |2 - 2i sin θ|² / 16 peaks at θ = ±π/2
        let (f, theta) = bell_fidelity(c(0.5), c(0.5), c(0.5), c(0.5));
        assert!((f - 0.5).abs() < 1e-14);
        assert!((theta.abs() - PI / 2.0).abs() < 1e-9);
    }

    #[test]
    fn uniform_damping_scales_quadratically() {
        for g in [0.3, 0.9, 0.999] {
            let (f, _) = bell_fidelity(c(0.5 * g), c(0.5 * g), c(0.5 * g), c(-0.5 * g));
            assert!((f - g * g).abs() < 1e-14);
        }
    }

    #[test]
    fn wrap_is_half_open() {
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
    }

    #[test]
    fn sweep_rejects_non_monotone_axis() {
        let p = Pulse::constant(4, 0.1, 0.0, 0.0).unwrap();
        let cfg = GateConfig::strontium_n61();
        assert!(sweep(&p, &cfg, &[0.0, 0.1, 0.05], &[0.0]).is_err());
    }

    #[test]
    fn sweep_csv_shape() {
        let p = Pulse::constant(4, 0.1, 0.2, 0.0).unwrap();
        let cfg = GateConfig::strontium_n61();
        let grid = sweep(
            &p,
            &cfg,
            &linspace(-0.05, 0.05, 3),
            &linspace(-0.02, 0.02, 5),
        )
        .unwrap();
        let csv = grid.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines.iter().all(|l| l.split(',').count() == 6));
    }
}
