// Copyright 2026 The rydberg-cz Contributors
// SPDX-License-Identifier: Apache-2.0

//! Choice of Rydberg level for a fixed dimensionless pulse.
//!
//! Physical parameters are scaled from an anchor level: `Ω ∝ n*^{-3/2}` at
//! fixed laser power, `C6 ∝ n*^{11}` (assumed van der Waals scaling, see
//! [`BlockadeScaling`]), decay
//! widths from [`crate::atomic::total_width`] and stray-field detunings
//! `δΔ/2π = -½ α_s E²` from [`crate::atomic::polarisability`]. The pulse is
//! reused unchanged at every `n`, so its physical duration scales as
//! `1/Ω(n)`.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::atomic::stark::quadratic_fields;
use crate::atomic::widths::DEFAULT_N_EXTRA;
use crate::atomic::{level, polarisability, total_width, AtomData, Constants, StarkBasis};
use crate::dynamics::Offsets;
use crate::error::{Error, Result};
use crate::fidelity::evaluate;
use crate::pulse::{pulse_from_json, GateConfig, Pulse};

const PROTOCOL_A_PULSE: &str = include_str!("../data/protocol_a.json");

/// Bundled Protocol-A pulse: best of 20 starts from seed 1 at `N = 100`.
pub fn reference_pulse() -> Pulse {
    pulse_from_json(PROTOCOL_A_PULSE, std::path::Path::new("data/protocol_a.json"))
        .expect("bundled pulse parses")
}

/// Conversion from mV/cm to V/m.
pub const MV_PER_CM: f64 = 0.1;
/// Resolution of the intersection-field bisection (mV/cm).
pub const INTERSECTION_RESOLUTION: f64 = 0.1;
/// Field bracket searched for the intersection (mV/cm).
pub const INTERSECTION_BRACKET: (f64, f64) = (0.4, 10.0);

/// How the blockade shift follows `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlockadeScaling {
    /// `C6 ∝ n*^{11}`.
    #[default]
    VanDerWaals,
    /// `V/Ω` held at its anchor value.
    FixedRatio,
}

impl BlockadeScaling {
    pub fn describe(&self) -> &'static str {
        match self {
            Self::VanDerWaals => "C6 ~ n*^11 (assumed van der Waals scaling)",
            Self::FixedRatio => "V/Omega fixed at the anchor value",
        }
    }
}

/// Scaling anchors and scan axes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RankConfig {
    pub anchor_n: u32,
    /// Rabi frequency at the anchor (rad/s).
    pub omega_anchor: f64,
    /// `C6` at the anchor (rad/s·m⁶), sign included.
    pub c6_anchor: f64,
    /// Interatomic distance (m).
    pub distance: f64,
    pub series: String,
    pub n_min: u32,
    pub n_max: u32,
    /// Stray-field magnitudes (mV/cm).
    pub fields: Vec<f64>,
    /// Radiation temperature (K).
    pub temperature: f64,
    /// Final states summed up to `n + n_extra`.
    pub n_extra: u32,
    pub blockade: BlockadeScaling,
}

impl Default for RankConfig {
    fn default() -> Self {
        Self {
            anchor_n: 61,
            omega_anchor: TAU * 6.8e6,
            c6_anchor: -TAU * 181e9 * 1e-36,
            distance: 3.5e-6,
            series: "5sns 3S1".into(),
            n_min: 40,
            n_max: 120,
            fields: vec![0.0, 1.0, 5.0],
            temperature: 300.0,
            n_extra: DEFAULT_N_EXTRA,
            blockade: BlockadeScaling::VanDerWaals,
        }
    }
}

impl RankConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_min > self.n_max {
            return Err(Error::Config("n_min exceeds n_max".into()));
        }
        if !(self.omega_anchor > 0.0 && self.distance > 0.0 && self.c6_anchor.is_finite()) {
            return Err(Error::Config(
                "anchor Rabi frequency and distance must be positive".into(),
            ));
        }
        if self.fields.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::Config("field magnitudes must be >= 0".into()));
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(Error::Config("temperature must be >= 0".into()));
        }
        Ok(())
    }

    pub fn n_axis(&self) -> Vec<u32> {
        (self.n_min..=self.n_max).collect()
    }
}

/// Anchor-free inputs for one `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelProperties {
    pub n: u32,
    pub n_star: f64,
    /// Rabi frequency (rad/s).
    pub omega_max: f64,
    /// Decay rate `1/τ` (1/s).
    pub gamma: f64,
    /// Scalar polarisability (atomic units).
    pub alpha_s: f64,
    /// Polarisability in Hz/(V/m)².
    pub alpha_hz: f64,
    /// Blockade shift `-C6/R⁶` (rad/s).
    pub v_int: f64,
}

impl LevelProperties {
    pub fn gate_config(&self, config: &RankConfig) -> Result<GateConfig> {
        GateConfig::new(
            self.omega_max,
            self.gamma,
            -self.v_int * config.distance.powi(6),
            config.distance,
        )
    }

    /// Stray-field detuning in units of `Ω_max(n)` at `field` mV/cm.
    pub fn dc_offset(&self, field: f64) -> f64 {
        let e = field * MV_PER_CM;
        TAU * (-0.5 * self.alpha_hz * e * e) / self.omega_max
    }
}

fn anchor_n_star(atom: &AtomData, config: &RankConfig) -> Result<f64> {
    Ok(level(atom.series(&config.series)?, config.anchor_n)?.n_star)
}

/// `Ω(n) = Ω(anchor) (n*_anchor / n*)^{3/2}` (rad/s).
pub fn scale_rabi(n: u32, atom: &AtomData, config: &RankConfig) -> Result<f64> {
    let ns = level(atom.series(&config.series)?, n)?.n_star;
    Ok(config.omega_anchor * (anchor_n_star(atom, config)? / ns).powf(1.5))
}

/// `V(n) = -C6(anchor) (n*/n*_anchor)^{11} / R⁶` (rad/s), or the anchor
/// `V/Ω` times `Ω(n)` under [`BlockadeScaling::FixedRatio`].
pub fn scale_blockade(n: u32, atom: &AtomData, config: &RankConfig) -> Result<f64> {
    let v_anchor = -config.c6_anchor / config.distance.powi(6);
    match config.blockade {
        BlockadeScaling::VanDerWaals => {
            let ns = level(atom.series(&config.series)?, n)?.n_star;
            Ok(v_anchor * (ns / anchor_n_star(atom, config)?).powi(11))
        }
        BlockadeScaling::FixedRatio => {
            Ok(v_anchor / config.omega_anchor * scale_rabi(n, atom, config)?)
        }
    }
}

/// Stray-field detuning for `n` at `field` mV/cm, in `Ω_max(n)` units.
pub fn dc_detuning_offset(n: u32, field: f64, atom: &AtomData, config: &RankConfig) -> Result<f64> {
    if !(field.is_finite() && field >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "field must be >= 0, got {field}"
        )));
    }
    if field == 0.0 {
        return Ok(0.0);
    }
    Ok(level_properties(n, atom, config)?.dc_offset(field))
}

/// Computes every scaled quantity for level `n`.
pub fn level_properties(n: u32, atom: &AtomData, config: &RankConfig) -> Result<LevelProperties> {
    let series = atom.series(&config.series)?;
    let lvl = level(series, n)?;
    let finals = atom.dipole_partners(&lvl);
    let width = total_width(
        &lvl,
        atom,
        &Constants::at_temperature(config.temperature),
        &finals,
        config.n_extra,
    )?;
    let fields = quadratic_fields(lvl.n_star, 11);
    let (fit, _) = polarisability(atom, &lvl, &fields, StarkBasis::default())?;
    Ok(LevelProperties {
        n,
        n_star: lvl.n_star,
        omega_max: scale_rabi(n, atom, config)?,
        gamma: 1.0 / width.lifetime,
        alpha_s: fit.alpha_s,
        alpha_hz: fit.alpha_hz(),
        v_int: scale_blockade(n, atom, config)?,
    })
}

/// Level properties on the configured `n` axis, in axis order.
pub fn properties_table(atom: &AtomData, config: &RankConfig) -> Result<Vec<LevelProperties>> {
    config.validate()?;
    config
        .n_axis()
        .par_iter()
        .map(|&n| level_properties(n, atom, config))
        .collect()
}

/// One row of the ranking table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankRow {
    pub props: LevelProperties,
    /// Field (mV/cm).
    pub field: f64,
    /// `δΔ_DC/2π` (Hz).
    pub dc_shift_hz: f64,
    pub fidelity: f64,
}

/// Fidelity of `pulse` at every level in `table` with a stray field of
/// `field` mV/cm.
pub fn fidelity_vs_n(
    pulse: &Pulse,
    table: &[LevelProperties],
    config: &RankConfig,
    field: f64,
) -> Result<Vec<RankRow>> {
    if !(field.is_finite() && field >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "field must be >= 0, got {field}"
        )));
    }
    table
        .par_iter()
        .map(|p| {
            let cfg = p.gate_config(config)?;
            let dd = p.dc_offset(field);
            let report = evaluate(pulse, &cfg, Offsets::new(0.0, dd))?;
            Ok(RankRow {
                props: *p,
                field,
                dc_shift_hz: dd * p.omega_max / TAU,
                fidelity: report.f,
            })
        })
        .collect()
}

/// Row with the highest fidelity; ties go to the smaller `n`.
pub fn optimal_state(rows: &[RankRow]) -> Option<&RankRow> {
    rows.iter()
        .fold(None, |best: Option<&RankRow>, r| match best {
            Some(b) if b.fidelity >= r.fidelity => Some(b),
            _ => Some(r),
        })
}

/// Field at which the best level stops lying above `n_ref`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Intersection {
    /// Field (mV/cm), resolved to [`INTERSECTION_RESOLUTION`].
    pub field: Option<f64>,
    /// The optimum already lies at or below `n_ref` at the lower edge of the
    /// bracket.
    pub at_lower_edge: bool,
}

fn best_n(
    pulse: &Pulse,
    table: &[LevelProperties],
    config: &RankConfig,
    field: f64,
) -> Result<(u32, f64)> {
    let rows = fidelity_vs_n(pulse, table, config, field)?;
    let best = optimal_state(&rows).ok_or_else(|| Error::InvalidArgument("empty n axis".into()))?;
    Ok((best.props.n, best.fidelity))
}

/// Bisects on the field for the point where the optimal level falls to
/// `n_ref`, i.e. where `F_max(E)` meets `F_{n_ref}(E)`.
pub fn intersection_field(
    pulse: &Pulse,
    table: &[LevelProperties],
    config: &RankConfig,
    n_ref: u32,
) -> Result<Intersection> {
    if !table.iter().any(|p| p.n == n_ref) {
        return Err(Error::InvalidArgument(format!(
            "n_ref = {n_ref} is not on the n axis"
        )));
    }
    let (mut lo, mut hi) = INTERSECTION_BRACKET;
    if best_n(pulse, table, config, lo)?.0 <= n_ref {
        return Ok(Intersection {
            field: Some(lo),
            at_lower_edge: true,
        });
    }
    if best_n(pulse, table, config, hi)?.0 > n_ref {
        return Ok(Intersection {
            field: None,
            at_lower_edge: false,
        });
    }
    while hi - lo > INTERSECTION_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if best_n(pulse, table, config, mid)?.0 > n_ref {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Intersection {
        field: Some(0.5 * (lo + hi)),
        at_lower_edge: false,
    })
}

/// Header lines documenting the scaling assumptions, each starting `# `.
pub fn report_header(config: &RankConfig) -> String {
    format!(
        "# series {}; anchor n = {}, Omega/2pi = {:.6e} Hz, C6/2pi = {:.6e} Hz m^6, R = {:.6e} m\n\
         # Omega ~ n*^-1.5 (fixed laser power); {}\n\
         # gamma = 1/tau from quantum-defect widths at T = {} K; dc shift = -1/2 alpha_s E^2\n",
        config.series,
        config.anchor_n,
        config.omega_anchor / TAU,
        config.c6_anchor / TAU,
        config.distance,
        config.blockade.describe(),
        config.temperature
    )
}

/// Columns `n,omega_max_hz,gamma_hz,alpha_s_au,dc_shift_hz,fidelity`, with
/// `gamma_hz` the decay rate `1/τ` in 1/s, followed by `field_mv_per_cm` and
/// `optimal` (1 on the best row of each field, see [`optimal_state`]).
pub fn rows_to_csv(rows: &[RankRow]) -> String {
    let mut out = String::from(
        "n,omega_max_hz,gamma_hz,alpha_s_au,dc_shift_hz,fidelity,field_mv_per_cm,optimal\n",
    );
    let mut start = 0;
    while start < rows.len() {
        let field = rows[start].field;
        let len = rows[start..]
            .iter()
            .take_while(|r| r.field == field)
            .count();
        let block = &rows[start..start + len];
        let best = optimal_state(block).map(|b| b.props.n);
        for r in block {
            writeln!(
                out,
                "{},{:.8e},{:.8e},{:.8e},{:.8e},{:.10},{},{}",
                r.props.n,
                r.props.omega_max / TAU,
                r.props.gamma,
                r.props.alpha_s,
                r.dc_shift_hz,
                r.fidelity,
                r.field,
                u8::from(best == Some(r.props.n))
            )
            .unwrap();
        }
        start += len;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn anchor_values() {
        let sr = AtomData::strontium88();
        let cfg = RankConfig::default();
        assert_eq!(scale_rabi(61, &sr, &cfg).unwrap(), TAU * 6.8e6);
        let v = scale_blockade(61, &sr, &cfg).unwrap();
        let expect = TAU * 181e9 * 1e-36 / 3.5e-6f64.powi(6);
        assert!((v / expect - 1.0).abs() < 1e-14);
        assert!(v / cfg.omega_anchor > 10.0);
    }

    #[test]
    fn rabi_exponent() {
        let sr = AtomData::strontium88();
        let cfg = RankConfig::default();
        let ns = |n| level(sr.series("5sns 3S1").unwrap(), n).unwrap().n_star;
        for n in [45, 80, 119] {
            let ratio = scale_rabi(n, &sr, &cfg).unwrap() / cfg.omega_anchor;
            assert!((ratio - (ns(61) / ns(n)).powf(1.5)).abs() < 1e-14);
        }
        let w: Vec<f64> = (40..=120)
            .map(|n| scale_rabi(n, &sr, &cfg).unwrap())
            .collect();
        assert!(w.windows(2).all(|p| p[1] < p[0]));
        let v: Vec<f64> = (40..=120)
            .map(|n| scale_blockade(n, &sr, &cfg).unwrap())
            .collect();
        assert!(v.windows(2).all(|p| p[1].abs() > p[0].abs()));
    }

    #[test]
    fn fixed_ratio_blockade() {
        let sr = AtomData::strontium88();
        let cfg = RankConfig {
            blockade: BlockadeScaling::FixedRatio,
            ..RankConfig::default()
        };
        let anchor = scale_blockade(61, &sr, &cfg).unwrap() / cfg.omega_anchor;
        for n in [40, 90, 120] {
            let r = scale_blockade(n, &sr, &cfg).unwrap() / scale_rabi(n, &sr, &cfg).unwrap();
            assert!((r / anchor - 1.0).abs() < 1e-12);
        }
        let parsed: RankConfig = toml::from_str("blockade = \"fixed-ratio\"").unwrap();
        assert_eq!(parsed.blockade, BlockadeScaling::FixedRatio);
        assert!(toml::from_str::<RankConfig>("blockade = \"linear\"").is_err());
    }

    #[test]
    fn offset_is_quadratic_and_high_field_seeking() {
        let p = LevelProperties {
            n: 61,
            n_star: 57.6,
            omega_max: TAU * 6.8e6,
            gamma: 1e4,
            alpha_s: 5e11,
            alpha_hz: 1.2e4,
            v_int: 1e9,
        };
        assert_eq!(p.dc_offset(0.0), 0.0);
        let a = p.dc_offset(1.0);
        assert!(a < 0.0);
        assert!((p.dc_offset(4.0) / a - 16.0).abs() < 1e-12);
    }

    #[test]
    fn ties_go_to_smaller_n() {
        let props = |n| LevelProperties {
            n,
            n_star: n as f64,
            omega_max: 1.0,
            gamma: 0.0,
            alpha_s: 0.0,
            alpha_hz: 0.0,
            v_int: 1.0,
        };
        let rows: Vec<RankRow> = [(50, 0.9), (51, 0.95), (52, 0.95)]
            .iter()
            .map(|&(n, f)| RankRow {
                props: props(n),
                field: 0.0,
                dc_shift_hz: 0.0,
                fidelity: f,
            })
            .collect();
        assert_eq!(optimal_state(&rows).unwrap().props.n, 51);
        let csv = rows_to_csv(&rows);
        let flags: Vec<&str> = csv
            .lines()
            .skip(1)
            .map(|l| l.rsplit(',').next().unwrap())
            .collect();
        assert_eq!(flags, ["0", "1", "0"]);
    }
}
