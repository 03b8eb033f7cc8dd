// Copyright 2026 The rydberg-cz Contributors
// SPDX-License-Identifier: Apache-2.0

//! Run configuration file. Every key is optional; unknown keys are errors.
//!
//! ```toml
//! [optimize]
//! preset = "protocol-a"      # base problem, then the overrides below
//! horizon = 10.0
//! n_steps = 100
//! delta_bound = 1.25
//! omega_bounds = [0.0, 1.0]
//! include_delta_robustness = true
//! enforce_zero_endpoints = true
//! sensitivity_metric = "gate-relevant"   # or "full-norm"
//! constraint_tol = 1e-5
//! target_phase = 3.141592653589793
//! starts = 20
//!
//! [optimize.weights]
//! q_sens_omega = 1.0
//!
//! [gate]                     # defaults: Sr at n = 61
//! omega_max = 42725660.0     # rad/s
//! gamma = 10362.69           # 1/s
//! c6 = -1.1372e-24           # rad/s m^6
//! distance = 3.5e-6          # m
//!
//! [atomic]
//! data = "defects.toml"      # defaults to the bundled Sr data
//! temperature = 300.0
//! n_extra = 40
//! stark_delta_n = 6
//! stark_l_max = 4
//! stark_m_j = 1.0
//!
//! [rank]                     # see RankConfig
//! fields = [0.0, 1.0, 5.0]
//! blockade = "van-der-waals" # or "fixed-ratio"
//! ```

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rydberg_cz::atomic::{AtomData, StarkBasis, DEFAULT_N_EXTRA};
use rydberg_cz::optimizer::{CostWeights, OptimizationProblem, SensitivityMetric, DEFAULT_STARTS};
use rydberg_cz::pulse::GateConfig;
use rydberg_cz::staterank::RankConfig;
use serde::Deserialize;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub optimize: OptimizeSection,
    pub gate: GateSection,
    pub atomic: AtomicSection,
    pub rank: RankConfig,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeSection {
    pub preset: Option<String>,
    pub horizon: Option<f64>,
    pub n_steps: Option<usize>,
    pub delta_bound: Option<f64>,
    pub omega_bounds: Option<(f64, f64)>,
    pub include_delta_robustness: Option<bool>,
    pub enforce_zero_endpoints: Option<bool>,
    pub sensitivity_metric: Option<SensitivityMetric>,
    pub constraint_tol: Option<f64>,
    pub target_phase: Option<f64>,
    pub starts: Option<usize>,
    pub weights: WeightsSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightsSection {
    pub q_sens_omega: Option<f64>,
    pub q_sens_delta: Option<f64>,
    pub q_phase: Option<f64>,
    pub q_pop: Option<f64>,
    pub q_tr: Option<f64>,
    pub r_domega: Option<f64>,
    pub r_ddelta: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GateSection {
    pub omega_max: Option<f64>,
    pub gamma: Option<f64>,
    pub c6: Option<f64>,
    pub distance: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AtomicSection {
    pub data: Option<PathBuf>,
    pub temperature: f64,
    pub n_extra: u32,
    pub stark_delta_n: u32,
    pub stark_l_max: u32,
    pub stark_m_j: f64,
}

impl Default for AtomicSection {
    fn default() -> Self {
        let basis = StarkBasis::default();
        Self {
            data: None,
            temperature: 300.0,
            n_extra: DEFAULT_N_EXTRA,
            stark_delta_n: basis.delta_n,
            stark_l_max: basis.l_max,
            stark_m_j: basis.m_j,
        }
    }
}

fn patch<T: Copy>(target: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *target = v;
    }
}

impl RunConfig {
    /// Reads `path`, or returns the defaults when no file is given. Relative
    /// data paths resolve against the config file's directory.
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let mut cfg: Self =
            toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        if let Some(data) = cfg.atomic.data.as_mut() {
            if data.is_relative() {
                if let Some(dir) = path.parent() {
                    *data = dir.join(&*data);
                }
            }
        }
        cfg.rank.validate()?;
        Ok(cfg)
    }

    /// The problem for `preset` (falling back to the file, then
    /// `protocol-a`) with every configured override applied.
    pub fn problem(&self, preset: Option<&str>) -> Result<OptimizationProblem> {
        let o = &self.optimize;
        let name = preset.or(o.preset.as_deref()).unwrap_or("protocol-a");
        let mut p = OptimizationProblem::preset(name)?;
        patch(&mut p.horizon, o.horizon);
        patch(&mut p.n_steps, o.n_steps);
        patch(&mut p.delta_bound, o.delta_bound);
        patch(&mut p.omega_bounds, o.omega_bounds);
        patch(&mut p.include_delta_robustness, o.include_delta_robustness);
        patch(&mut p.enforce_zero_endpoints, o.enforce_zero_endpoints);
        patch(&mut p.sensitivity_metric, o.sensitivity_metric);
        patch(&mut p.constraint_tol, o.constraint_tol);
        patch(&mut p.target_phase, o.target_phase);
        let w = &o.weights;
        let pw: &mut CostWeights = &mut p.weights;
        patch(&mut pw.q_sens_omega, w.q_sens_omega);
        patch(&mut pw.q_sens_delta, w.q_sens_delta);
        patch(&mut pw.q_phase, w.q_phase);
        patch(&mut pw.q_pop, w.q_pop);
        patch(&mut pw.q_tr, w.q_tr);
        patch(&mut pw.r_domega, w.r_domega);
        patch(&mut pw.r_ddelta, w.r_ddelta);
        Ok(p)
    }

    pub fn starts(&self) -> usize {
        self.optimize.starts.unwrap_or(DEFAULT_STARTS)
    }

    pub fn gate(&self) -> Result<GateConfig> {
        let mut g = GateConfig::strontium_n61();
        patch(&mut g.omega_max, self.gate.omega_max);
        patch(&mut g.gamma, self.gate.gamma);
        patch(&mut g.c6, self.gate.c6);
        patch(&mut g.distance, self.gate.distance);
        g.validate()?;
        Ok(g)
    }

    pub fn atom(&self) -> Result<AtomData> {
        match &self.atomic.data {
            Some(path) => Ok(AtomData::load(path)?),
            None => Ok(AtomData::strontium88()),
        }
    }

    pub fn stark_basis(&self) -> StarkBasis {
        StarkBasis {
            delta_n: self.atomic.stark_delta_n,
            l_max: self.atomic.stark_l_max,
            m_j: self.atomic.stark_m_j,
        }
    }
}
