// Copyright 2026 The rydberg-cz Contributors
// SPDX-License-Identifier: Apache-2.0

//! Coulomb-approximation radial functions.
//!
//! The reduced radial equation `u'' = [l(l+1)/r² - 2/r - 2E] u` is solved on
//! `x = √r` with `u = x^{1/2} χ`, which turns it into
//! `χ'' = [(2l+½)(2l+3/2)/x² - 8 - 8E x²] χ` on a uniform `x` grid.
//! Integration runs inward from `r = 2n*(n*+15)`, where the solution is
//! exponentially small, to the core radius. Inside the inner turning point
//! the integration stops at the first minimum of `|u|`, beyond which the
//! irregular solution would take over.

use crate::atomic::RydbergLevel;
use crate::error::{Error, Result};

/// Grid controls for Numerov integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialOptions {
    /// Largest allowed step in `x = √r` (Bohr^{1/2}).
    pub max_step: f64,
    /// Minimum number of grid points between the cutoffs.
    pub min_points: usize,
}

impl Default for RadialOptions {
    fn default() -> Self {
        Self {
            max_step: 0.01,
            min_points: 5000,
        }
    }
}

impl RadialOptions {
    /// Same grid with the step halved.
    pub fn refined(self) -> Self {
        Self {
            max_step: 0.5 * self.max_step,
            min_points: 2 * self.min_points,
        }
    }
}

/// Normalized reduced radial function `u(r) = r R(r)` on a square-root grid.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialWavefunction {
    /// Radial points (Bohr), `r_k = (k h)²`, increasing.
    pub grid: Vec<f64>,
    /// `u` at each grid point; `∫u² dr = 1`.
    pub u: Vec<f64>,
    pub inner_cutoff: f64,
    pub outer_cutoff: f64,
    step: f64,
    first: usize,
}

impl RadialWavefunction {
    /// Step of the underlying `x = √r` grid.
    pub fn step(&self) -> f64 {
        self.step
    }

    fn x(&self, i: usize) -> f64 {
        (self.first + i) as f64 * self.step
    }

    /// `∫u² dr` by the trapezoid rule in `x`.
    pub fn norm_sq(&self) -> f64 {
        let h = self.step;
        trapezoid(self.u.len(), h, |i| {
            let x = self.x(i);
            2.0 * x * self.u[i] * self.u[i]
        })
    }

    /// Number of sign changes of `u`, ignoring the exponentially small tails.
    pub fn nodes(&self) -> usize {
        let peak = self.u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let sig: Vec<f64> = self
            .u
            .iter()
            .copied()
            .filter(|v| v.abs() > 1e-6 * peak)
            .collect();
        sig.windows(2).filter(|w| w[0] * w[1] < 0.0).count()
    }

    /// Cubic Lagrange interpolation of `u` at `x = √r`; zero outside the grid.
    fn u_at_x(&self, x: f64) -> f64 {
        let t = x / self.step - self.first as f64;
        let n = self.u.len();
        if t < 0.0 || t > (n - 1) as f64 {
            return 0.0;
        }
        let i = (t.floor() as usize).clamp(1, n.saturating_sub(3).max(1));
        if n < 4 {
            return self.u[(t.round() as usize).min(n - 1)];
        }
        let s = t - i as f64;
        let (p0, p1, p2, p3) = (self.u[i - 1], self.u[i], self.u[i + 1], self.u[i + 2]);
        -s * (s - 1.0) * (s - 2.0) / 6.0 * p0 + (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0 * p1
            - (s + 1.0) * s * (s - 2.0) / 2.0 * p2
            + (s + 1.0) * s * (s - 1.0) / 6.0 * p3
    }
}

fn trapezoid(n: usize, h: f64, f: impl Fn(usize) -> f64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = (1..n - 1).map(&f).sum();
    h * (inner + 0.5 * (f(0) + f(n - 1)))
}

/// Radial function with the default grid and no core (inner cutoff at the
/// grid origin).
pub fn radial_wavefunction(level: &RydbergLevel, core_radius: f64) -> Result<RadialWavefunction> {
    radial_wavefunction_with(level, core_radius, RadialOptions::default())
}

pub fn radial_wavefunction_with(
    level: &RydbergLevel,
    core_radius: f64,
    opts: RadialOptions,
) -> Result<RadialWavefunction> {
    let ns = level.n_star;
    if !(ns.is_finite() && ns > 0.0) {
        return Err(Error::Domain(format!("invalid n* = {ns}")));
    }
    let outer = 2.0 * ns * (ns + 15.0);
    let x_out = outer.sqrt();
    let h = opts.max_step.min(x_out / opts.min_points as f64);
    let k_last = (x_out / h).floor() as usize;
    let k_first = ((core_radius.max(0.0).sqrt() / h).ceil() as usize).max(1);
    if k_last < k_first + 4 {
        return Err(Error::Integration(format!(
            "core radius {core_radius} leaves no room below the outer cutoff {outer}"
        )));
    }
    let e = level.energy;
    let ll = 2.0 * level.l as f64;
    let centrifugal = (ll + 0.5) * (ll + 1.5);
    let g = |k: usize| {
        let x = k as f64 * h;
        centrifugal / (x * x) - 8.0 - 8.0 * e * x * x
    };
    let c = h * h / 12.0;
    let r_turn = level.inner_turning_point();

    let len = k_last - k_first + 1;
    let mut chi = vec![0.0; len];
    chi[len - 1] = 1e-30;
    chi[len - 2] = 1e-30 * (1.0 + h * (-8.0 * e).sqrt() * x_out);
    let mut stop = 0;
    let mut peak = 0.0f64;
    for i in (0..len - 2).rev() {
        let k = k_first + i;
        let (g0, g1, g2) = (g(k), g(k + 1), g(k + 2));
        chi[i] = (2.0 * (1.0 + 5.0 * c * g1) * chi[i + 1] - (1.0 - c * g2) * chi[i + 2])
            / (1.0 - c * g0);
        if !chi[i].is_finite() {
            return Err(Error::Integration(format!(
                "non-finite amplitude at r = {} for n* = {ns}",
                (k as f64 * h).powi(2)
            )));
        }
        let x = k as f64 * h;
        let u_here = chi[i].abs() * x.sqrt();
        let u_prev = chi[i + 1].abs() * ((k + 1) as f64 * h).sqrt();
        if x * x >= r_turn {
            peak = peak.max(u_here);
        } else if u_here > u_prev && u_here < 1e-3 * peak {
            stop = i + 1;
            break;
        }
    }
    if stop > 0 {
        let x = (k_first + stop) as f64 * h;
        let u_edge = chi[stop].abs() * x.sqrt();
        if u_edge > 1e10 * peak.max(f64::MIN_POSITIVE) {
            return Err(Error::Integration(format!(
                "solution diverges inside r = {}",
                x * x
            )));
        }
    }
    let first = k_first + stop;
    let mut u: Vec<f64> = chi[stop..]
        .iter()
        .enumerate()
        .map(|(i, v)| v * (((first + i) as f64) * h).sqrt())
        .collect();
    let mut wf = RadialWavefunction {
        grid: (0..u.len())
            .map(|i| (((first + i) as f64) * h).powi(2))
            .collect(),
        u: Vec::new(),
        inner_cutoff: (first as f64 * h).powi(2),
        outer_cutoff: outer,
        step: h,
        first,
    };
    // positive in the outer tail
    let sign = u
        .iter()
        .rev()
        .find(|v| v.abs() > 0.0)
        .map_or(1.0, |v| v.signum());
    let peak_u = u.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(peak_u.is_finite() && peak_u > 0.0) {
        return Err(Error::Integration("vanishing solution".into()));
    }
    u.iter_mut().for_each(|v| *v *= sign / peak_u);
    wf.u = u;
    let norm = wf.norm_sq().sqrt();
    wf.u.iter_mut().for_each(|v| *v /= norm);
    Ok(wf)
}

/// Radial dipole matrix element `∫ u_a u_b r dr` (atomic units) from
/// precomputed radial functions. The coarser function is interpolated onto
/// the finer grid.
pub fn radial_overlap_r(a: &RadialWavefunction, b: &RadialWavefunction) -> f64 {
    let (fine, coarse) = if a.step <= b.step { (a, b) } else { (b, a) };
    let x_lo = fine.x(0).max(coarse.x(0));
    let x_hi = fine.x(fine.u.len() - 1).min(coarse.x(coarse.u.len() - 1));
    if x_hi <= x_lo {
        return 0.0;
    }
    let same = (fine.step - coarse.step).abs() <= 1e-15 * fine.step;
    let h = fine.step;
    let i0 = ((x_lo / h).ceil() as usize).saturating_sub(fine.first);
    let i1 = ((x_hi / h).floor() as usize - fine.first).min(fine.u.len() - 1);
    if i1 <= i0 {
        return 0.0;
    }
    trapezoid(i1 - i0 + 1, h, |j| {
        let i = i0 + j;
        let x = fine.x(i);
        let other = if same {
            coarse.u[fine.first + i - coarse.first]
        } else {
            coarse.u_at_x(x)
        };
        2.0 * x * x * x * fine.u[i] * other
    })
}

/// Radial dipole matrix element between two levels of one atom.
pub fn rdme(a: &RydbergLevel, b: &RydbergLevel, core_radius: f64) -> Result<f64> {
    if a.l.abs_diff(b.l) != 1 {
        return Err(Error::SelectionRule(format!(
            "l = {} and l = {} are not dipole-coupled",
            a.l, b.l
        )));
    }
    let wa = radial_wavefunction(a, core_radius)?;
    let wb = radial_wavefunction(b, core_radius)?;
    Ok(radial_overlap_r(&wa, &wb))
}
