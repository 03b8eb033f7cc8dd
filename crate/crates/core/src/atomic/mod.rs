// Copyright 2026 The rydberg-cz Contributors
// SPDX-License-Identifier: Apache-2.0

//! Single-channel quantum-defect theory for Rydberg series.
//!
//! Energies follow `E = -1/(2 n*²)` Hartree with `n* = n - δ(n)` from a
//! Rydberg–Ritz expansion. Radial functions come from Numerov integration in
//! a pure Coulomb potential ([`radial`]), widths and lifetimes from the
//! single-channel reduction of the natural-width formula ([`widths`]), and
//! Stark shifts from diagonalising the field coupling in a truncated basis
//! ([`stark`]).
//!
//! ```
//! use rydberg_cz::atomic::{level, AtomData};
//!
//! let sr = AtomData::strontium88();
//! let s = sr.series("5sns 3S1").unwrap();
//! let lvl = level(s, 61).unwrap();
//! assert!((lvl.n_star - 57.63).abs() < 0.01);
//! assert_eq!(lvl.energy, -0.5 / (lvl.n_star * lvl.n_star));
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod constants;
pub mod radial;
pub mod stark;
pub mod widths;
pub mod wigner;

pub use constants::Constants;
pub use radial::{
    radial_overlap_r, radial_wavefunction, radial_wavefunction_with, rdme, RadialOptions,
    RadialWavefunction,
};
pub use stark::{
    fit_polarisability, polarisability, quadratic_fields, stark_map, PolarisabilityFit, StarkBasis,
    StarkMap,
};
pub use widths::{
    lifetime_scan, spontaneous_width, total_width, transition, LifetimeRow, LifetimeScan,
    TotalWidth, TransitionRecord, DEFAULT_N_EXTRA,
};
pub use wigner::{wigner3j, wigner6j};

const SR88_DATA: &str = include_str!("../../data/sr88_triplet.toml");

/// Rydberg–Ritz defect model for one `(l, s, j)` series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DefectModel {
    pub label: String,
    pub l: u32,
    pub s: f64,
    pub j: f64,
    pub delta0: f64,
    pub delta2: f64,
    pub delta4: f64,
    pub n_min: u32,
    pub source: String,
    /// Levels whose effective quantum number is pinned to a measured value,
    /// as `(n, n*)`.
    #[serde(default)]
    pub fixed: Vec<(u32, f64)>,
}

impl DefectModel {
    /// Zero-defect series (hydrogen with the given orbital and total
    /// angular momentum).
    pub fn hydrogenic(l: u32, j: f64) -> Self {
        Self {
            label: format!("H l={l} j={j}"),
            l,
            s: 0.5,
            j,
            delta0: 0.0,
            delta2: 0.0,
            delta4: 0.0,
            n_min: l + 1,
            source: "hydrogen".into(),
            fixed: Vec::new(),
        }
    }

    /// Ritz defect `δ(n)`, ignoring fixed levels.
    pub fn defect(&self, n: u32) -> f64 {
        let m = n as f64 - self.delta0;
        let m2 = m * m;
        self.delta0 + self.delta2 / m2 + self.delta4 / (m2 * m2)
    }

    /// Effective principal quantum number, honouring fixed levels.
    pub fn n_star(&self, n: u32) -> f64 {
        self.fixed
            .iter()
            .find(|(k, _)| *k == n)
            .map_or_else(|| n as f64 - self.defect(n), |&(_, ns)| ns)
    }

    fn validate(&self) -> Result<()> {
        let s2 = wigner::twice(self.s)?;
        let j2 = wigner::twice(self.j)?;
        let l2 = 2 * self.l as i64;
        if s2 < 0 || j2 < (l2 - s2).abs() || j2 > l2 + s2 || (l2 + s2 + j2) % 2 != 0 {
            return Err(Error::Config(format!(
                "series {}: j = {} is not reachable from l = {}, s = {}",
                self.label, self.j, self.l, self.s
            )));
        }
        if self.n_min <= self.l {
            return Err(Error::Config(format!(
                "series {}: n_min must exceed l",
                self.label
            )));
        }
        for n in self.n_min..self.n_min + 400 {
            let ns = self.n_star(n);
            if !(ns.is_finite() && ns > 0.0 && ns <= n as f64) {
                return Err(Error::Config(format!(
                    "series {}: n* = {ns} at n = {n} is not in (0, n]",
                    self.label
                )));
            }
        }
        Ok(())
    }
}

/// One bound level of a series.
#[derive(Debug, Clone, PartialEq)]
pub struct RydbergLevel {
    pub n: u32,
    pub l: u32,
    pub s: f64,
    pub j: f64,
    pub n_star: f64,
    /// Binding energy (Hartree), negative.
    pub energy: f64,
    pub label: String,
}

impl RydbergLevel {
    /// Classical inner turning point `n*² - n* sqrt(n*² - l(l+1))` (Bohr).
    pub fn inner_turning_point(&self) -> f64 {
        let ns = self.n_star;
        let ll = (self.l * (self.l + 1)) as f64;
        ns * ns - ns * (ns * ns - ll).max(0.0).sqrt()
    }
}

/// Level `n` of `series`. Fails below the series floor.
pub fn level(series: &DefectModel, n: u32) -> Result<RydbergLevel> {
    if n < series.n_min {
        return Err(Error::Domain(format!(
            "n = {n} is below the floor {} of series {}",
            series.n_min, series.label
        )));
    }
    let n_star = series.n_star(n);
    Ok(RydbergLevel {
        n,
        l: series.l,
        s: series.s,
        j: series.j,
        n_star,
        energy: -0.5 / (n_star * n_star),
        label: series.label.clone(),
    })
}

/// A set of series for one atom, plus the core parameters shared by all of
/// them.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomData {
    pub atom: String,
    /// Inner cutoff of radial integration (Bohr).
    pub core_radius: f64,
    /// Orbital angular momentum of the core electron.
    pub core_l: u32,
    pub series: Vec<DefectModel>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileFixed {
    n: u32,
    energy_cm: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FileSeries {
    label: String,
    l: u32,
    s: f64,
    j: f64,
    delta0: f64,
    #[serde(default)]
    delta2: f64,
    #[serde(default)]
    delta4: f64,
    n_min: u32,
    source: String,
    #[serde(default)]
    fixed: Vec<FileFixed>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomFile {
    atom: String,
    ionization_limit_cm: f64,
    rydberg_cm: f64,
    core_radius: f64,
    #[serde(default)]
    core_l: u32,
    series: Vec<FileSeries>,
}

impl AtomData {
    /// Parses the TOML defect-data format (see `data/sr88_triplet.toml`).
    pub fn from_toml_str(text: &str, origin: &Path) -> Result<Self> {
        let file: AtomFile = toml::from_str(text).map_err(|e| Error::Parse {
            path: origin.to_path_buf(),
            context: e.to_string(),
        })?;
        if !(file.core_radius.is_finite() && file.core_radius >= 0.0) {
            return Err(Error::Config("core_radius must be >= 0".into()));
        }
        let series = file
            .series
            .into_iter()
            .map(|s| {
                let fixed = s
                    .fixed
                    .iter()
                    .map(|f| {
                        let binding = file.ionization_limit_cm - f.energy_cm;
                        if binding <= 0.0 {
                            return Err(Error::Config(format!(
                                "series {}: fixed level n = {} lies above the ionization limit",
                                s.label, f.n
                            )));
                        }
                        Ok((f.n, (file.rydberg_cm / binding).sqrt()))
                    })
                    .collect::<Result<Vec<_>>>()?;
                let model = DefectModel {
                    label: s.label,
                    l: s.l,
                    s: s.s,
                    j: s.j,
                    delta0: s.delta0,
                    delta2: s.delta2,
                    delta4: s.delta4,
                    n_min: s.n_min,
                    source: s.source,
                    fixed,
                };
                model.validate()?;
                Ok(model)
            })
            .collect::<Result<Vec<_>>>()?;
        if series.is_empty() {
            return Err(Error::Config("no series defined".into()));
        }
        Ok(Self {
            atom: file.atom,
            core_radius: file.core_radius,
            core_l: file.core_l,
            series,
        })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text, path)
    }

    /// The bundled 88Sr triplet data.
    pub fn strontium88() -> Self {
        Self::from_toml_str(SR88_DATA, Path::new("data/sr88_triplet.toml"))
            .expect("bundled data file is valid")
    }

    /// Hydrogen with every `(l, j)` series up to `l_max`.
    pub fn hydrogen(l_max: u32) -> Self {
        let mut series = Vec::new();
        for l in 0..=l_max {
            if l > 0 {
                series.push(DefectModel::hydrogenic(l, l as f64 - 0.5));
            }
            series.push(DefectModel::hydrogenic(l, l as f64 + 0.5));
        }
        Self {
            atom: "H".into(),
            core_radius: 0.0,
            core_l: 0,
            series,
        }
    }

    pub fn series(&self, label: &str) -> Result<&DefectModel> {
        self.series
            .iter()
            .find(|s| s.label == label)
            .ok_or_else(|| {
                let known: Vec<_> = self.series.iter().map(|s| s.label.as_str()).collect();
                Error::Config(format!(
                    "unknown series {label:?}; available: {}",
                    known.join(", ")
                ))
            })
    }

    /// Series reachable from `(l, s, j)` by one electric-dipole photon.
    pub fn dipole_partners(&self, lvl: &RydbergLevel) -> Vec<&DefectModel> {
        self.series
            .iter()
            .filter(|s| {
                s.l.abs_diff(lvl.l) == 1
                    && s.s == lvl.s
                    && (s.j - lvl.j).abs() <= 1.0
                    && !(s.j == 0.0 && lvl.j == 0.0)
            })
            .collect()
    }
}
