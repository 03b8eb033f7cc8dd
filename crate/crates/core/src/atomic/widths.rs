// Copyright 2026 The rydberg-cz Contributors
// SPDX-License-Identifier: Apache-2.0

//! Spontaneous and blackbody-induced widths, lifetimes and lifetime scans.
//!
//! For a single channel with an `s` core electron the natural-width formula
//! reduces to the line-strength factor
//! `max(l_a,l_b) (2L_b+1)(2J_b+1)(2L_a+1) {J_b 1 J_a; L_a S L_b}² {L_b 1 L_a; l_a l_c l_b}²`
//! times the squared radial matrix element, with `L = l` and `l_c` the core
//! orbital momentum.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::atomic::radial::{radial_overlap_r, radial_wavefunction, RadialWavefunction};
use crate::atomic::wigner::{sixj_twice, twice};
use crate::atomic::{constants::TIME_AU, level, AtomData, Constants, DefectModel, RydbergLevel};
use crate::error::{Error, Result};

/// Default number of principal quantum numbers summed above the initial one.
pub const DEFAULT_N_EXTRA: u32 = 40;

/// One radiative channel `a → b`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionRecord {
    pub from: RydbergLevel,
    pub to: RydbergLevel,
    /// `E_b - E_a` (Hartree).
    pub omega_ab: f64,
    /// Radial matrix element (e·a₀).
    pub rdme: f64,
    /// `(4α/3c²)|ω|³ S_ang R²` (atomic units of rate).
    pub gamma_sp: f64,
}

/// Single-channel angular factor for `a → b`.
pub fn angular_factor(a: &RydbergLevel, b: &RydbergLevel, core_l: u32) -> Result<f64> {
    let la = 2 * a.l as i64;
    let lb = 2 * b.l as i64;
    let ja = twice(a.j)?;
    let jb = twice(b.j)?;
    let sa = twice(a.s)?;
    let lc = 2 * core_l as i64;
    let one = 2;
    let s1 = sixj_twice([jb, one, ja, la, sa, lb]);
    let s2 = sixj_twice([lb, one, la, la, lc, lb]);
    let lmax = a.l.max(b.l) as f64;
    Ok(
        lmax * (b.l * 2 + 1) as f64
            * (jb + 1) as f64
            * (a.l * 2 + 1) as f64
            * (s1 * s1)
            * (s2 * s2),
    )
}

fn check_dipole(a: &RydbergLevel, b: &RydbergLevel) -> Result<()> {
    if a.l.abs_diff(b.l) != 1 {
        return Err(Error::SelectionRule(format!(
            "{} (l={}) and {} (l={})",
            a.label, a.l, b.label, b.l
        )));
    }
    Ok(())
}

fn record(
    a: &RydbergLevel,
    b: &RydbergLevel,
    r: f64,
    core_l: u32,
    c: &Constants,
) -> Result<TransitionRecord> {
    let omega = b.energy - a.energy;
    let gamma = 4.0 * c.alpha / (3.0 * c.c * c.c)
        * omega.abs().powi(3)
        * angular_factor(a, b, core_l)?
        * r
        * r;
    Ok(TransitionRecord {
        from: a.clone(),
        to: b.clone(),
        omega_ab: omega,
        rdme: r,
        gamma_sp: gamma,
    })
}

/// Rate coefficient for `a → b` in either direction (emission or the
/// absorption prefactor), without photon occupation.
pub fn transition(
    a: &RydbergLevel,
    b: &RydbergLevel,
    atom: &AtomData,
    c: &Constants,
) -> Result<TransitionRecord> {
    check_dipole(a, b)?;
    let wa = radial_wavefunction(a, atom.core_radius)?;
    let wb = radial_wavefunction(b, atom.core_radius)?;
    record(a, b, radial_overlap_r(&wa, &wb), atom.core_l, c)
}

/// Spontaneous emission width `a → b`. Requires `E_a > E_b`.
pub fn spontaneous_width(
    a: &RydbergLevel,
    b: &RydbergLevel,
    atom: &AtomData,
    c: &Constants,
) -> Result<TransitionRecord> {
    if a.energy <= b.energy {
        return Err(Error::Ordering(format!(
            "{} n={} does not lie above {} n={}",
            a.label, a.n, b.label, b.n
        )));
    }
    transition(a, b, atom, c)
}

/// Total width of a level and its breakdown.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TotalWidth {
    /// Spontaneous plus blackbody width (atomic units).
    pub gamma_total: f64,
    /// Spontaneous part alone (atomic units).
    pub gamma_sp: f64,
    /// `1/Γ` in seconds.
    pub lifetime: f64,
}

/// Sums spontaneous and blackbody-induced rates from `a` into every level of
/// `finals` with `n_min ≤ n ≤ a.n + n_extra`.
pub fn total_width(
    a: &RydbergLevel,
    atom: &AtomData,
    c: &Constants,
    finals: &[&DefectModel],
    n_extra: u32,
) -> Result<TotalWidth> {
    if finals.is_empty() {
        return Err(Error::Config("no decay channels given".into()));
    }
    if !(c.temperature.is_finite() && c.temperature >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "temperature must be >= 0, got {}",
            c.temperature
        )));
    }
    let wa = radial_wavefunction(a, atom.core_radius)?;
    let mut gamma_sp = 0.0;
    let mut gamma = 0.0;
    for series in finals {
        for n in series.n_min..=a.n + n_extra {
            let b = level(series, n)?;
            check_dipole(a, &b)?;
            let wb: RadialWavefunction = radial_wavefunction(&b, atom.core_radius)?;
            let t = record(a, &b, radial_overlap_r(&wa, &wb), atom.core_l, c)?;
            let nbar = c.occupation(t.omega_ab);
            if b.energy < a.energy {
                gamma_sp += t.gamma_sp;
                gamma += t.gamma_sp * (1.0 + nbar);
            } else {
                gamma += t.gamma_sp * nbar;
            }
        }
    }
    Ok(TotalWidth {
        gamma_total: gamma,
        gamma_sp,
        lifetime: TIME_AU / gamma,
    })
}

/// One row of a lifetime scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LifetimeRow {
    pub n: u32,
    pub n_star: f64,
    /// Lifetime (s).
    pub lifetime: f64,
    /// `(τ_fit - τ)/τ`.
    pub fit_residual: f64,
}

/// Lifetimes over a range of `n` with the fit `1/τ = A n*⁻² + B n*⁻³`
/// (`A`, `B` in 1/s).
#[derive(Debug, Clone, PartialEq)]
pub struct LifetimeScan {
    pub series: String,
    pub temperature: f64,
    pub rows: Vec<LifetimeRow>,
    pub a: f64,
    pub b: f64,
}

impl LifetimeScan {
    /// Columns `n,n_star,value,fit_residual`; `value` is the lifetime in
    /// seconds.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,n_star,value,fit_residual\n");
        for r in &self.rows {
            writeln!(
                out,
                "{},{:.8e},{:.8e},{:.8e}",
                r.n, r.n_star, r.lifetime, r.fit_residual
            )
            .unwrap();
        }
        out
    }

    /// Human-readable fit summary.
    pub fn fit_line(&self) -> String {
        format!(
            "1/tau = A n*^-2 + B n*^-3 with A = {:.6e} 1/s, B = {:.6e} 1/s",
            self.a, self.b
        )
    }

    /// Least-squares slope of `ln τ` against `ln n*`.
    pub fn log_slope(&self) -> f64 {
        let pts: Vec<(f64, f64)> = self
            .rows
            .iter()
            .map(|r| (r.n_star.ln(), r.lifetime.ln()))
            .collect();
        log_log_slope(&pts)
    }
}

pub(crate) fn log_log_slope(pts: &[(f64, f64)]) -> f64 {
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Lifetimes of `series` levels for every `n` in `n_range`, decaying into
/// all dipole partners present in `atom`.
pub fn lifetime_scan(
    atom: &AtomData,
    series: &str,
    n_range: std::ops::RangeInclusive<u32>,
    c: &Constants,
    n_extra: u32,
) -> Result<LifetimeScan> {
    let model = atom.series(series)?;
    let ns: Vec<u32> = n_range.collect();
    if ns.len() < 5 {
        return Err(Error::InvalidArgument(
            "lifetime scan needs at least 5 values of n".into(),
        ));
    }
    let computed = ns
        .par_iter()
        .map(|&n| {
            let lvl = level(model, n)?;
            let finals = atom.dipole_partners(&lvl);
            let w = total_width(&lvl, atom, c, &finals, n_extra)?;
            Ok((n, lvl.n_star, w.lifetime))
        })
        .collect::<Result<Vec<_>>>()?;
    // 1/τ = A x + B y with x = n*^-2, y = n*^-3
    let (mut sxx, mut sxy, mut syy, mut sxg, mut syg) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(_, ns, tau) in &computed {
        let (x, y, g) = (ns.powi(-2), ns.powi(-3), 1.0 / tau);
        // relative weighting keeps every row on an equal footing
        let w = tau * tau;
        sxx += w * x * x;
        sxy += w * x * y;
        syy += w * y * y;
        sxg += w * x * g;
        syg += w * y * g;
    }
    let det = sxx * syy - sxy * sxy;
    if !(det.is_finite() && det.abs() > 1e-12 * sxx * syy) {
        return Err(Error::Fit("degenerate n range for the lifetime fit".into()));
    }
    let a = (sxg * syy - syg * sxy) / det;
    let b = (syg * sxx - sxg * sxy) / det;
    let rows = computed
        .into_iter()
        .map(|(n, ns, tau)| {
            let fit = 1.0 / (a * ns.powi(-2) + b * ns.powi(-3));
            LifetimeRow {
                n,
                n_star: ns,
                lifetime: tau,
                fit_residual: (fit - tau) / tau,
            }
        })
        .collect();
    Ok(LifetimeScan {
        series: series.to_string(),
        temperature: c.temperature,
        rows,
        a,
        b,
    })
}
