// Copyright 2026 The rydberg-cz Contributors
// SPDX-License-Identifier: Apache-2.0

//! DC Stark maps and scalar polarisabilities.
//!
//! The field couples states of equal `M_J` through `z`. The basis holds all
//! levels within `Δn` of the target with `l ≤ l_max` and the target's spin;
//! the target eigenvalue is followed across the field axis by maximal
//! eigenvector overlap.

use std::fmt::Write as _;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;

use crate::atomic::constants::{FIELD_AU, HARTREE_HZ};
use crate::atomic::radial::{radial_overlap_r, radial_wavefunction, RadialWavefunction};
use crate::atomic::wigner::{sixj_twice, threej_twice, twice, Twice};
use crate::atomic::{level, AtomData, RydbergLevel};
use crate::error::{Error, Result};

/// Relative change of the largest-field shift, when the window grows by two,
/// above which the map is flagged as unconverged.
pub const WINDOW_TOLERANCE: f64 = 0.01;
/// Smallest acceptable coefficient of determination of a quadratic fit.
pub const MIN_R_SQUARED: f64 = 0.9999;
/// Largest acceptable quartic-to-quadratic ratio at the top of the axis.
pub const MAX_QUARTIC_RATIO: f64 = 0.01;

/// Truncation of the Stark basis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StarkBasis {
    /// Principal quantum numbers `n ± delta_n` are kept.
    pub delta_n: u32,
    pub l_max: u32,
    /// Magnetic quantum number of the block.
    pub m_j: f64,
}

impl Default for StarkBasis {
    fn default() -> Self {
        Self {
            delta_n: 6,
            l_max: 4,
            m_j: 1.0,
        }
    }
}

/// Field-free energies and the `z` matrix in a truncated basis.
#[derive(Debug, Clone)]
pub struct StarkHamiltonian {
    pub states: Vec<RydbergLevel>,
    /// Energies relative to the target (Hartree).
    pub energies: Vec<f64>,
    /// `⟨i|z|j⟩` (Bohr).
    pub dipole: DMatrix<f64>,
    pub target: usize,
}

fn parity(x: Twice) -> f64 {
    // x is twice an integer exponent
    if (x / 2).rem_euclid(2) == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Angular part of `⟨L S J M|z|L' S J' M⟩` for one valence electron on an
/// `s` core.
fn z_angular(a: &RydbergLevel, b: &RydbergLevel, m: Twice) -> Result<f64> {
    let (la, lb) = (2 * a.l as Twice, 2 * b.l as Twice);
    let (ja, jb) = (twice(a.j)?, twice(b.j)?);
    let s = twice(a.s)?;
    let m_part = parity(ja - m) * threej_twice([ja, 2, jb], [-m, 0, m]);
    let j_part = parity(la + s + jb + 2)
        * (((ja + 1) * (jb + 1)) as f64).sqrt()
        * sixj_twice([la, ja, s, jb, lb, 2]);
    let l_part =
        parity(la) * (((la + 1) * (lb + 1)) as f64).sqrt() * threej_twice([la, 2, lb], [0, 0, 0]);
    Ok(m_part * j_part * l_part)
}

impl StarkHamiltonian {
    pub fn new(atom: &AtomData, target: &RydbergLevel, basis: StarkBasis) -> Result<Self> {
        if basis.delta_n < 2 {
            return Err(Error::InvalidArgument(
                "Stark basis window must be at least 2".into(),
            ));
        }
        let m = twice(basis.m_j)?;
        if m.abs() > twice(target.j)? {
            return Err(Error::InvalidArgument(format!(
                "|m_j| = {} exceeds j = {}",
                basis.m_j, target.j
            )));
        }
        let n_lo = target.n.saturating_sub(basis.delta_n);
        let n_hi = target.n + basis.delta_n;
        let mut states = Vec::new();
        let mut target_idx = None;
        for series in &atom.series {
            if series.l > basis.l_max || series.s != target.s || twice(series.j)? < m.abs() {
                continue;
            }
            for n in n_lo.max(series.n_min)..=n_hi {
                let lvl = level(series, n)?;
                if lvl.label == target.label && lvl.n == target.n {
                    target_idx = Some(states.len());
                }
                states.push(lvl);
            }
        }
        let target_idx = target_idx.ok_or_else(|| {
            Error::InvalidArgument(format!(
                "target {} n={} is not part of the basis",
                target.label, target.n
            ))
        })?;
        let waves: Vec<RadialWavefunction> = states
            .par_iter()
            .map(|s| radial_wavefunction(s, atom.core_radius))
            .collect::<Result<_>>()?;
        let dim = states.len();
        let pairs: Vec<(usize, usize)> = (0..dim)
            .flat_map(|i| (i + 1..dim).map(move |j| (i, j)))
            .filter(|&(i, j)| states[i].l.abs_diff(states[j].l) == 1)
            .collect();
        let elements = pairs
            .par_iter()
            .map(|&(i, j)| {
                let ang = z_angular(&states[i], &states[j], m)?;
                if ang == 0.0 {
                    return Ok(0.0);
                }
                Ok(ang * radial_overlap_r(&waves[i], &waves[j]))
            })
            .collect::<Result<Vec<f64>>>()?;
        let mut dipole = DMatrix::zeros(dim, dim);
        for (&(i, j), v) in pairs.iter().zip(elements) {
            dipole[(i, j)] = v;
            dipole[(j, i)] = v;
        }
        let e0 = target.energy;
        Ok(Self {
            energies: states.iter().map(|s| s.energy - e0).collect(),
            states,
            dipole,
            target: target_idx,
        })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// `H₀ + F z` with `F` in atomic units.
    pub fn matrix(&self, field_au: f64) -> DMatrix<f64> {
        let mut h = &self.dipole * field_au;
        for (i, e) in self.energies.iter().enumerate() {
            h[(i, i)] += e;
        }
        h
    }

    /// Second-order perturbative shift of the target (Hartree).
    pub fn second_order_shift(&self, field_au: f64) -> f64 {
        let t = self.target;
        (0..self.dim())
            .filter(|&k| k != t)
            .map(|k| self.dipole[(t, k)].powi(2) / (self.energies[t] - self.energies[k]))
            .sum::<f64>()
            * field_au
            * field_au
    }

    /// Target shifts along `fields_au`, tracked by eigenvector overlap.
    fn track(&self, fields_au: &[f64]) -> Vec<f64> {
        let mut prev = nalgebra::DVector::zeros(self.dim());
        prev[self.target] = 1.0;
        fields_au
            .iter()
            .map(|&f| {
                if f == 0.0 {
                    return 0.0;
                }
                let eig = SymmetricEigen::new(self.matrix(f));
                let (best, _) = (0..self.dim())
                    .map(|k| (k, eig.eigenvectors.column(k).dot(&prev).abs()))
                    .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
                prev = eig.eigenvectors.column(best).into_owned();
                eig.eigenvalues[best]
            })
            .collect()
    }
}

/// Tracked target shifts on a field axis.
#[derive(Debug, Clone, PartialEq)]
pub struct StarkMap {
    /// Field magnitudes (V/m).
    pub fields: Vec<f64>,
    /// Energy shift of the target (Hartree).
    pub shifts: Vec<f64>,
    pub basis: StarkBasis,
    pub basis_size: usize,
    /// Set when widening the window by two changes the top-field shift by
    /// more than [`WINDOW_TOLERANCE`].
    pub warning: Option<String>,
}

impl StarkMap {
    pub fn converged(&self) -> bool {
        self.warning.is_none()
    }

    /// Shifts as frequencies (Hz).
    pub fn shifts_hz(&self) -> Vec<f64> {
        self.shifts.iter().map(|s| s * HARTREE_HZ).collect()
    }

    /// Columns `field_v_per_m,shift_hartree,shift_hz`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("field_v_per_m,shift_hartree,shift_hz\n");
        for (f, s) in self.fields.iter().zip(&self.shifts) {
            writeln!(out, "{f:.8e},{s:.8e},{:.8e}", s * HARTREE_HZ).unwrap();
        }
        out
    }
}

fn check_axis(fields: &[f64]) -> Result<()> {
    if fields.is_empty() {
        return Err(Error::InvalidArgument("empty field axis".into()));
    }
    if fields.iter().any(|f| !(f.is_finite() && *f >= 0.0)) {
        return Err(Error::InvalidArgument(
            "field magnitudes must be finite and >= 0".into(),
        ));
    }
    if fields.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidArgument(
            "field axis must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Stark shifts of `target` for fields in V/m.
pub fn stark_map(
    atom: &AtomData,
    target: &RydbergLevel,
    fields: &[f64],
    basis: StarkBasis,
) -> Result<StarkMap> {
    check_axis(fields)?;
    let au: Vec<f64> = fields.iter().map(|f| f / FIELD_AU).collect();
    let ham = StarkHamiltonian::new(atom, target, basis)?;
    let shifts = ham.track(&au);
    let top = *shifts.last().unwrap();
    let warning = if top != 0.0 {
        let wider = StarkBasis {
            delta_n: basis.delta_n + 2,
            ..basis
        };
        let ham2 = StarkHamiltonian::new(atom, target, wider)?;
        let top2 = *ham2.track(&au).last().unwrap();
        let change = ((top2 - top) / top).abs();
        (change > WINDOW_TOLERANCE).then(|| {
            format!(
                "shift at {} V/m changes by {:.2}% when the window grows to ±{}",
                fields.last().unwrap(),
                100.0 * change,
                wider.delta_n
            )
        })
    } else {
        None
    };
    Ok(StarkMap {
        fields: fields.to_vec(),
        shifts,
        basis,
        basis_size: ham.dim(),
        warning,
    })
}

/// Result of a quadratic Stark fit.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarisabilityFit {
    /// Scalar polarisability (atomic units).
    pub alpha_s: f64,
    pub r_squared: f64,
    /// `|c₄ E⁴| / |c₂ E²|` at the largest field of a quadratic-plus-quartic
    /// fit.
    pub quartic_ratio: f64,
}

impl PolarisabilityFit {
    /// `α_s` in Hz/(V/m)², for use in `δ = -½ α_s E²`.
    pub fn alpha_hz(&self) -> f64 {
        self.alpha_s * HARTREE_HZ / (FIELD_AU * FIELD_AU)
    }

    /// [`Error::NonQuadratic`] unless `R² ≥` [`MIN_R_SQUARED`] and the quartic
    /// ratio is at most [`MAX_QUARTIC_RATIO`].
    pub fn check_quadratic(&self) -> Result<()> {
        if self.r_squared < MIN_R_SQUARED || self.quartic_ratio > MAX_QUARTIC_RATIO {
            return Err(Error::NonQuadratic {
                r_squared: self.r_squared,
            });
        }
        Ok(())
    }
}

/// Fits `shift = -½ α_s E²` (fields in V/m, shifts in Hartree).
pub fn fit_polarisability(fields: &[f64], shifts: &[f64]) -> Result<PolarisabilityFit> {
    if fields.len() != shifts.len() || fields.len() < 3 {
        return Err(Error::InvalidArgument(
            "need at least 3 matching field/shift pairs".into(),
        ));
    }
    let e2: Vec<f64> = fields.iter().map(|f| (f / FIELD_AU).powi(2)).collect();
    let s22: f64 = e2.iter().map(|x| x * x).sum();
    let c = e2.iter().zip(shifts).map(|(x, y)| x * y).sum::<f64>() / s22;
    let mean = shifts.iter().sum::<f64>() / shifts.len() as f64;
    let ss_res: f64 = e2
        .iter()
        .zip(shifts)
        .map(|(x, y)| (y - c * x).powi(2))
        .sum();
    let ss_tot: f64 = shifts.iter().map(|y| (y - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return Err(Error::Fit("shifts are constant".into()));
    }
    let r_squared = 1.0 - ss_res / ss_tot;
    // y = c2 x + c4 x² with x = E²
    let s24: f64 = e2.iter().map(|x| x.powi(3)).sum();
    let s44: f64 = e2.iter().map(|x| x.powi(4)).sum();
    let b2: f64 = e2.iter().zip(shifts).map(|(x, y)| x * y).sum();
    let b4: f64 = e2.iter().zip(shifts).map(|(x, y)| x * x * y).sum();
    let det = s22 * s44 - s24 * s24;
    let quartic_ratio = if det.abs() > 1e-14 * s22 * s44 {
        let c2 = (b2 * s44 - b4 * s24) / det;
        let c4 = (b4 * s22 - b2 * s24) / det;
        let top = *e2.iter().fold(&0.0, |m, x| if x > m { x } else { m });
        (c4 * top * top).abs() / (c2 * top).abs()
    } else {
        0.0
    };
    Ok(PolarisabilityFit {
        alpha_s: -2.0 * c,
        r_squared,
        quartic_ratio,
    })
}

/// Polarisability of `target` from a Stark map on `fields` (V/m). Fails with
/// [`Error::NonQuadratic`] when the axis leaves the quadratic regime.
pub fn polarisability(
    atom: &AtomData,
    target: &RydbergLevel,
    fields: &[f64],
    basis: StarkBasis,
) -> Result<(PolarisabilityFit, StarkMap)> {
    let map = stark_map(atom, target, fields, basis)?;
    let fit = fit_polarisability(&map.fields, &map.shifts)?;
    fit.check_quadratic()?;
    Ok((fit, map))
}

/// Field axis `[0, E_max]` (V/m) with `E_max = 0.1 (100/n*)⁵`, which keeps
/// the field coupling a fixed small fraction of the level spacing.
pub fn quadratic_fields(n_star: f64, points: usize) -> Vec<f64> {
    let e_max = 0.1 * (100.0 / n_star).powi(5);
    crate::fidelity::linspace(0.0, e_max, points)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sr_level(n: u32) -> (AtomData, RydbergLevel) {
        let sr = AtomData::strontium88();
        let lvl = level(sr.series("5sns 3S1").unwrap(), n).unwrap();
        (sr, lvl)
    }

    #[test]
    fn dipole_matrix_symmetric_angular() {
        let sr = AtomData::strontium88();
        let s = level(sr.series("5sns 3S1").unwrap(), 50).unwrap();
        let p = level(sr.series("5snp 3P2").unwrap(), 50).unwrap();
        let d = level(sr.series("5snd 3D3").unwrap(), 50).unwrap();
        for (a, b) in [(&s, &p), (&p, &d)] {
            let ab = z_angular(a, b, 2).unwrap();
            let ba = z_angular(b, a, 2).unwrap();
            assert!((ab - ba).abs() < 1e-14 && ab != 0.0);
        }
    }

    #[test]
    fn zero_field_gives_zero_shift() {
        let (sr, lvl) = sr_level(50);
        let map = stark_map(&sr, &lvl, &[0.0, 0.05], StarkBasis::default()).unwrap();
        assert_eq!(map.shifts[0], 0.0);
    }

    #[test]
    fn matches_second_order_perturbation() {
        let (sr, lvl) = sr_level(60);
        let ham = StarkHamiltonian::new(&sr, &lvl, StarkBasis::default()).unwrap();
        let f = 0.01 / FIELD_AU;
        let exact = ham.track(&[f])[0];
        let pert = ham.second_order_shift(f);
        assert!(((exact - pert) / pert).abs() < 0.01, "{exact} vs {pert}");
        assert!(pert < 0.0 && exact < 0.0);
    }

    #[test]
    fn doubling_shifts_doubles_alpha() {
        let fields = [0.0, 0.1, 0.2, 0.3];
        let shifts: Vec<f64> = fields
            .iter()
            .map(|f: &f64| -1e9 * (f / FIELD_AU).powi(2) * (1.0 + 1e-3 * f))
            .collect();
        let a = fit_polarisability(&fields, &shifts).unwrap();
        let doubled: Vec<f64> = shifts.iter().map(|s| 2.0 * s).collect();
        let b = fit_polarisability(&fields, &doubled).unwrap();
        assert_eq!(b.alpha_s, 2.0 * a.alpha_s);
    }

    #[test]
    fn rejects_bad_axes() {
        let (sr, lvl) = sr_level(50);
        let b = StarkBasis::default();
        assert!(stark_map(&sr, &lvl, &[0.1, 0.05], b).is_err());
        assert!(stark_map(&sr, &lvl, &[-0.1, 0.05], b).is_err());
        let narrow = StarkBasis { delta_n: 1, ..b };
        assert!(stark_map(&sr, &lvl, &[0.0, 0.05], narrow).is_err());
    }
}

#[cfg(test)]
mod hydrogen_oracle {
    use super::*;

    #[test]
    fn linear_stark_fan_of_hydrogen() {
        // n = 6 manifold, m_l = 0 and 1 both present in the m_j = 1/2 block;
        // extreme parabolic states shift by ±(3/2) n (n - 1) F.
        let h = AtomData::hydrogen(5);
        let lvl = level(&h.series[0], 6).unwrap();
        let basis = StarkBasis {
            delta_n: 2,
            l_max: 5,
            m_j: 0.5,
        };
        let ham = StarkHamiltonian::new(&h, &lvl, basis).unwrap();
        let f = 1e-9;
        let eig = SymmetricEigen::new(ham.matrix(f));
        let top = eig
            .eigenvalues
            .iter()
            .filter(|e| e.abs() < 1e-4)
            .fold(f64::NEG_INFINITY, |m, &e| m.max(e));
        let expect = 1.5 * 6.0 * 5.0 * f;
        assert!(((top - expect) / expect).abs() < 1e-4, "{top} vs {expect}");
    }
}
