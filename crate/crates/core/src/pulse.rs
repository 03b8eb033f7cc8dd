// Copyright 2026 The rydberg-cz Contributors
// SPDX-License-Identifier: Apache-2.0

//! Pulse and gate-configuration types.
//!
//! Everything downstream of [`GateConfig`] works in units of the maximum Rabi
//! frequency: Rabi values and detunings are fractions of `Ω_max`, times are in
//! `1/Ω_max`. A [`GateConfig`] carries the SI values and converts at the
//! boundary.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on the `[0, 1]` Rabi bound and on detuning bounds.
pub const BOUND_TOL: f64 = 1e-9;

/// Version written into and required from pulse files.
pub const PULSE_FILE_VERSION: i64 = 1;

/// A piecewise-constant control trajectory in `Ω_max` units.
///
/// Step `k` holds `omega[k]`, `delta[k]` for a duration `dt`, so the total
/// gate time is `n_steps * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    dt: f64,
    omega: Vec<f64>,
    delta: Vec<f64>,
    meta: String,
}

impl Pulse {
    pub fn new(dt: f64, omega: Vec<f64>, delta: Vec<f64>, meta: impl Into<String>) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "dt must be positive, got {dt}"
            )));
        }
        if omega.is_empty() {
            return Err(Error::InvalidArgument(
                "pulse needs at least one step".into(),
            ));
        }
        if omega.len() != delta.len() {
            return Err(Error::Consistency(format!(
                "omega has {} entries but delta has {}",
                omega.len(),
                delta.len()
            )));
        }
        for (k, (&w, &d)) in omega.iter().zip(&delta).enumerate() {
            if !w.is_finite() || !d.is_finite() {
                return Err(Error::NumericInput(format!(
                    "non-finite control at step {k}"
                )));
            }
            if w < -BOUND_TOL {
                return Err(Error::BoundViolation {
                    step: k,
                    quantity: "omega",
                    value: w,
                    bound: 0.0,
                });
            }
            if w > 1.0 + BOUND_TOL {
                return Err(Error::BoundViolation {
                    step: k,
                    quantity: "omega",
                    value: w,
                    bound: 1.0,
                });
            }
        }
        Ok(Self {
            dt,
            omega,
            delta,
            meta: meta.into(),
        })
    }

    /// Constant controls over `n_steps` steps.
    pub fn constant(n_steps: usize, dt: f64, omega: f64, delta: f64) -> Result<Self> {
        Self::new(dt, vec![omega; n_steps], vec![delta; n_steps], "")
    }

    pub fn n_steps(&self) -> usize {
        self.omega.len()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn duration(&self) -> f64 {
        self.dt * self.omega.len() as f64
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn meta(&self) -> &str {
        &self.meta
    }

    pub fn with_meta(mut self, meta: impl Into<String>) -> Self {
        self.meta = meta.into();
        self
    }

    pub fn max_abs_delta(&self) -> f64 {
        self.delta.iter().fold(0.0_f64, |m, d| m.max(d.abs()))
    }

    /// The same controls played backwards in time.
    pub fn time_reversed(&self) -> Self {
        let mut omega = self.omega.clone();
        let mut delta = self.delta.clone();
        omega.reverse();
        delta.reverse();
        Self {
            dt: self.dt,
            omega,
            delta,
            meta: self.meta.clone(),
        }
    }

    /// Forward differences `(x[k+1] - x[k]) / dt`: the inverse of
    /// [`integrate_controls`].
    pub fn control_rates(&self) -> Vec<(f64, f64)> {
        self.omega
            .windows(2)
            .zip(self.delta.windows(2))
            .map(|(w, d)| ((w[1] - w[0]) / self.dt, (d[1] - d[0]) / self.dt))
            .collect()
    }

    /// CSV with columns `step,t,omega,delta`, floats at 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,t,omega,delta\n");
        for k in 0..self.n_steps() {
            let t = k as f64 * self.dt;
            writeln!(
                out,
                "{k},{t:.16e},{:.16e},{:.16e}",
                self.omega[k], self.delta[k]
            )
            .unwrap();
        }
        out
    }
}

/// Accumulates control rates into a pulse by forward Euler:
/// `omega[k+1] = omega[k] + rate[k] * dt`, starting from `initial`.
///
/// The result has `rates.len() + 1` steps. Values are never clipped; an
/// accumulated Rabi value outside `[0, 1]` or a detuning beyond
/// `delta_bound` is reported at the first offending step.
pub fn integrate_controls(
    rates: &[(f64, f64)],
    dt: f64,
    initial: (f64, f64),
    delta_bound: f64,
) -> Result<Pulse> {
    if rates.is_empty() {
        return Err(Error::InvalidArgument("no control rates given".into()));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let mut omega = Vec::with_capacity(rates.len() + 1);
    let mut delta = Vec::with_capacity(rates.len() + 1);
    let (mut w, mut d) = initial;
    omega.push(w);
    delta.push(d);
    for &(dw, dd) in rates {
        w += dw * dt;
        d += dd * dt;
        omega.push(w);
        delta.push(d);
    }
    for (k, (&w, &d)) in omega.iter().zip(&delta).enumerate() {
        if !(-BOUND_TOL..=1.0 + BOUND_TOL).contains(&w) {
            let bound = if w < 0.0 { 0.0 } else { 1.0 };
            return Err(Error::BoundViolation {
                step: k,
                quantity: "omega",
                value: w,
                bound,
            });
        }
        if d.abs() > delta_bound + BOUND_TOL {
            return Err(Error::BoundViolation {
                step: k,
                quantity: "delta",
                value: d,
                bound: delta_bound,
            });
        }
    }
    Pulse::new(dt, omega, delta, "")
}

/// Linear interpolation onto `new_n_steps` samples spanning the same duration.
///
/// Sample `k` sits at `t = k * dt`. Samples past the last original one hold
/// its value. When `new_n_steps` is a multiple of `n_steps` the original
/// samples are reproduced exactly, so down-sampling back recovers the input.
pub fn resample(pulse: &Pulse, new_n_steps: usize) -> Result<Pulse> {
    if new_n_steps < 2 {
        return Err(Error::InvalidArgument(format!(
            "new_n_steps must be >= 2, got {new_n_steps}"
        )));
    }
    let n = pulse.n_steps();
    let interp = |xs: &[f64]| -> Vec<f64> {
        (0..new_n_steps)
            .map(|j| {
                // Position in old-index units, kept as an exact rational.
                let num = j * n;
                let i = num / new_n_steps;
                let rem = num % new_n_steps;
                if i + 1 >= n || rem == 0 {
                    xs[i.min(n - 1)]
                } else {
                    let frac = rem as f64 / new_n_steps as f64;
                    xs[i] + (xs[i + 1] - xs[i]) * frac
                }
            })
            .collect()
    };
    let dt = pulse.duration() / new_n_steps as f64;
    Pulse::new(
        dt,
        interp(&pulse.omega),
        interp(&pulse.delta),
        pulse.meta.clone(),
    )
}

#[derive(Serialize, Deserialize)]
struct PulseFile {
    version: i64,
    units: String,
    n_steps: usize,
    dt: f64,
    omega: Vec<f64>,
    delta: Vec<f64>,
    #[serde(default)]
    meta: String,
}

/// Serializes a pulse to the versioned JSON document format.
pub fn pulse_to_json(pulse: &Pulse) -> String {
    let file = PulseFile {
        version: PULSE_FILE_VERSION,
        units: "omega_max".into(),
        n_steps: pulse.n_steps(),
        dt: pulse.dt,
        omega: pulse.omega.clone(),
        delta: pulse.delta.clone(),
        meta: pulse.meta.clone(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("pulse serialization cannot fail");
    s.push('\n');
    s
}

/// Parses a pulse document. `origin` only labels error messages.
pub fn pulse_from_json(text: &str, origin: &Path) -> Result<Pulse> {
    let parse_err = |context: String| Error::Parse {
        path: origin.to_path_buf(),
        context,
    };
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    let version = value
        .get("version")
        .ok_or_else(|| parse_err("missing field `version`".into()))?
        .as_i64()
        .ok_or_else(|| parse_err("field `version` is not an integer".into()))?;
    if version != PULSE_FILE_VERSION {
        return Err(Error::Version {
            found: version,
            expected: PULSE_FILE_VERSION,
        });
    }
    // Re-parse from text so serde reports line/column for field errors.
    let file: PulseFile = serde_json::from_str(text).map_err(|e| parse_err(e.to_string()))?;
    if file.units != "omega_max" {
        return Err(parse_err(format!(
            "field `units`: expected \"omega_max\", got {:?}",
            file.units
        )));
    }
    if file.omega.len() != file.n_steps || file.delta.len() != file.n_steps {
        return Err(Error::Consistency(format!(
            "n_steps = {} but omega has {} and delta has {} entries",
            file.n_steps,
            file.omega.len(),
            file.delta.len()
        )));
    }
    Pulse::new(file.dt, file.omega, file.delta, file.meta)
}

pub fn save_pulse(pulse: &Pulse, path: impl AsRef<Path>) -> Result<()> {
    fs::write(path, pulse_to_json(pulse))?;
    Ok(())
}

pub fn load_pulse(path: impl AsRef<Path>) -> Result<Pulse> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    pulse_from_json(&text, path)
}

/// Physical context of a gate, in SI angular units.
///
/// The interaction `v_int = -c6 / R^6` is always derived, never stored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GateConfig {
    /// Maximum Rabi frequency (rad/s).
    pub omega_max: f64,
    /// Total decay width of the Rydberg state (rad/s).
    pub gamma: f64,
    /// Van der Waals coefficient (rad/s * m^6), sign included.
    pub c6: f64,
    /// Interatomic distance (m).
    pub distance: f64,
}

impl GateConfig {
    pub fn new(omega_max: f64, gamma: f64, c6: f64, distance: f64) -> Result<Self> {
        let cfg = Self {
            omega_max,
            gamma,
            c6,
            distance,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_max.is_finite() && self.omega_max > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "omega_max must be positive, got {}",
                self.omega_max
            )));
        }
        if !(self.gamma.is_finite() && self.gamma >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "gamma must be >= 0, got {}",
                self.gamma
            )));
        }
        if !(self.distance.is_finite() && self.distance > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "distance must be positive, got {}",
                self.distance
            )));
        }
        if !self.c6.is_finite() {
            return Err(Error::InvalidArgument("c6 must be finite".into()));
        }
        Ok(())
    }

    /// Sr parameters at n = 61: Ω_max = 2π·6.8 MHz, τ = 96.5 µs,
    /// C6 = -2π·181 GHz·µm⁶, R = 3.5 µm.
    pub fn strontium_n61() -> Self {
        use std::f64::consts::TAU;
        Self {
            omega_max: TAU * 6.8e6,
            gamma: 1.0 / 96.5e-6,
            c6: -TAU * 181e9 * 1e-36,
            distance: 3.5e-6,
        }
    }

    /// Interaction energy `-c6 / R^6` (rad/s).
    pub fn v_int(&self) -> f64 {
        -self.c6 / self.distance.powi(6)
    }

    /// Decay width in units of `Ω_max`.
    pub fn gamma_dimless(&self) -> f64 {
        self.gamma / self.omega_max
    }

    /// Interaction in units of `Ω_max`.
    pub fn v_int_dimless(&self) -> f64 {
        self.v_int() / self.omega_max
    }

    pub fn without_decay(mut self) -> Self {
        self.gamma = 0.0;
        self
    }

    /// Converts a dimensionless time to seconds.
    pub fn to_seconds(&self, t: f64) -> f64 {
        t / self.omega_max
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_rates_give_zero_pulse() {
        let p = integrate_controls(&[(0.0, 0.0); 9], 0.1, (0.0, 0.0), 1.0).unwrap();
        assert_eq!(p.n_steps(), 10);
        assert!(p.omega().iter().chain(p.delta()).all(|&x| x == 0.0));
    }

    #[test]
    fn triangle_from_rates() {
        let (n, dt, c) = (100usize, 0.1, 0.15);
        let rates: Vec<_> = (0..n)
            .map(|k| if k < n / 2 { (c, 0.0) } else { (-c, 0.0) })
            .collect();
        let p = integrate_controls(&rates, dt, (0.0, 0.0), 1.0).unwrap();
        // closed-form Euler sum: omega[k] = c dt min(k, n - k)
        for k in 0..=n {
            let expect = c * dt * (k.min(n - k)) as f64;
            assert!((p.omega()[k] - expect).abs() < 1e-14, "k={k}");
        }
        let peak = p.omega().iter().cloned().fold(0.0, f64::max);
        assert!((peak - c * n as f64 * dt / 2.0).abs() < 1e-14);
    }

    #[test]
    fn overshoot_reports_first_step() {
        // 0.3 per step: 0.3, 0.6, 0.9, 1.2 -> step 4 offends
        let err = integrate_controls(&[(3.0, 0.0); 6], 0.1, (0.0, 0.0), 1.0).unwrap_err();
        match err {
            Error::BoundViolation { step, quantity, .. } => {
                assert_eq!(step, 4);
                assert_eq!(quantity, "omega");
            }
            other => panic!("unexpected {other}"),
        }
        let err = integrate_controls(&[(0.0, 5.0); 6], 0.1, (0.0, 0.0), 1.25).unwrap_err();
        assert!(matches!(
            err,
            Error::BoundViolation {
                step: 3,
                quantity: "delta",
                ..
            }
        ));
    }

    #[test]
    fn resample_constant_and_identity() {
        let p = Pulse::constant(7, 0.3, 0.4, -0.2).unwrap();
        let q = resample(&p, 23).unwrap();
        assert!(q.omega().iter().all(|&w| w == 0.4));
        assert!(q.delta().iter().all(|&d| d == -0.2));
        assert!((q.duration() - p.duration()).abs() < 1e-15);

        let two = Pulse::new(0.5, vec![0.1, 0.9], vec![0.3, -0.7], "x").unwrap();
        assert_eq!(resample(&two, 2).unwrap(), two);
    }

    #[test]
    fn resample_triangle_keeps_peak() {
        let n = 100;
        let dt = 0.1;
        let omega: Vec<f64> = (0..n).map(|k| 0.018 * (k.min(n - k)) as f64).collect();
        let p = Pulse::new(dt, omega, vec![0.0; n], "").unwrap();
        let q = resample(&p, 4 * n).unwrap();
        let peak_p = p.omega().iter().cloned().fold(0.0, f64::max);
        let peak_q = q.omega().iter().cloned().fold(0.0, f64::max);
        assert!((peak_p - peak_q).abs() < 1e-12);
        assert!((q.duration() - p.duration()).abs() < 1e-12);
    }

    #[test]
    fn json_errors() {
        let p = Pulse::new(0.25, vec![0.0, 0.5, 0.0], vec![0.1, 0.2, 0.3], "m").unwrap();
        let text = pulse_to_json(&p);
        let origin = Path::new("mem");
        assert_eq!(pulse_from_json(&text, origin).unwrap(), p);

        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v.as_object_mut().unwrap().remove("delta");
        let err = pulse_from_json(&v.to_string(), origin)
            .unwrap_err()
            .to_string();
        assert!(err.contains("delta"), "{err}");

        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["n_steps"] = 5.into();
        assert!(matches!(
            pulse_from_json(&v.to_string(), origin),
            Err(Error::Consistency(_))
        ));

        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v["version"] = 2.into();
        assert!(matches!(
            pulse_from_json(&v.to_string(), origin),
            Err(Error::Version { found: 2, .. })
        ));
    }

    #[test]
    fn gate_config_interaction() {
        let cfg = GateConfig::strontium_n61();
        assert_eq!(cfg.v_int(), -cfg.c6 / cfg.distance.powi(6));
        // ~2π·98.5 MHz, far above Ω_max
        assert!(cfg.v_int_dimless() > 10.0);
        assert!(GateConfig::new(-1.0, 0.0, 0.0, 1.0).is_err());
    }
}
