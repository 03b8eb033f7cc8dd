// Copyright 2026 The rydberg-cz Contributors
// SPDX-License-Identifier: Apache-2.0

//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Exits 0 after printing every line. Set `ACCEPTANCE_STRICT=1` to exit 1
//! when any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rydberg_cz::atomic::constants::TIME_AU;
use rydberg_cz::atomic::{
    level, lifetime_scan, polarisability, quadratic_fields, rdme, spontaneous_width, wigner6j,
    AtomData, Constants, RydbergLevel, StarkBasis, DEFAULT_N_EXTRA,
};
use rydberg_cz::dynamics::{
    full_to_sector01, full_to_sector11, propagate_dimless, propagate_full, FullTwoAtomState,
    Offsets, SectorParams, TrajectoryRecord,
};
use rydberg_cz::fidelity::{evaluate, linspace, sweep, wrap_angle};
use rydberg_cz::optimizer::{
    cost_with, gradient, multistart_solve, Controls, OptimizationProblem, SolveReport,
};
use rydberg_cz::pulse::{pulse_to_json, resample, GateConfig, Pulse};
use rydberg_cz::staterank::{
    fidelity_vs_n, intersection_field, optimal_state, properties_table, rows_to_csv,
    scale_blockade, BlockadeScaling, RankConfig,
};
use rydberg_cz::Result;

const STARTS: usize = 20;
const SEED: u64 = 1;
const PROBE: f64 = 0.05;

type Outcome = Result<(bool, String)>;

struct Tally {
    failed: Vec<usize>,
}

impl Tally {
    fn report(&mut self, id: usize, name: &str, outcome: Outcome) {
        let (pass, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
        if !pass {
            self.failed.push(id);
        }
        let tag = if pass { "PASS" } else { "FAIL" };
        println!("[{tag}] {id:>2} {name}: {detail}");
    }
}

struct Solved {
    rep: SolveReport,
    elapsed: Duration,
    plus: f64,
    minus: f64,
}

fn solve(preset: &str) -> Result<Solved> {
    let problem = OptimizationProblem::preset(preset)?;
    let cfg = GateConfig::strontium_n61();
    let t = Instant::now();
    let rep = multistart_solve(&problem, &cfg, STARTS, SEED)?;
    let elapsed = t.elapsed();
    let plus = evaluate(&rep.pulse, &cfg, Offsets::new(PROBE, 0.0))?.f;
    let minus = evaluate(&rep.pulse, &cfg, Offsets::new(-PROBE, 0.0))?.f;
    Ok(Solved {
        rep,
        elapsed,
        plus,
        minus,
    })
}

fn criterion_1(a: &Solved) -> Outcome {
    let clean = evaluate(
        &a.rep.pulse,
        &GateConfig::strontium_n61().without_decay(),
        Offsets::default(),
    )?;
    let phase = wrap_angle(clean.phi - PI).abs();
    let pop = (clean.p_tot - 4.0).abs();
    let secs = a.elapsed.as_secs_f64();
    let pass = a.rep.converged
        && clean.infidelity() <= 1e-4
        && phase <= 1e-5
        && pop <= 1e-5
        && secs <= 600.0;
    Ok((
        pass,
        format!(
            "converged {} (best seed {}), 1-F {:.2e}, phase err {phase:.1e}, |p_tot-4| {pop:.1e}, {secs:.0} s",
            a.rep.converged,
            a.rep.seed,
            clean.infidelity()
        ),
    ))
}

fn robustness(s: &Solved, f_min: f64, tr_max: f64) -> Outcome {
    let tr = s.rep.report.t_bar_r;
    let pass = s.rep.converged && s.plus >= f_min && s.minus >= f_min && tr <= tr_max;
    Ok((
        pass,
        format!(
            "F(+{PROBE}) {:.5}, F(-{PROBE}) {:.5} (need >= {f_min}), T_r {tr:.3} (need <= {tr_max})",
            s.plus, s.minus
        ),
    ))
}

fn criterion_4(a: &Solved, b: &Solved, t: &Solved) -> Outcome {
    let pass = b.plus > a.plus && a.plus > t.plus && t.plus <= 0.992;
    Ok((
        pass,
        format!(
            "F(+{PROBE}): B {:.5} > A {:.5} > time-optimal-style {:.5} (need <= 0.992, converged {})",
            b.plus, a.plus, t.plus, t.rep.converged
        ),
    ))
}

fn smooth_pulse(rng: &mut ChaCha8Rng) -> Pulse {
    let n = rng.random_range(10..60);
    let dt = rng.random_range(0.05..0.3);
    let a: [f64; 3] = std::array::from_fn(|_| rng.random_range(-0.15..0.15));
    let b: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
    let s = |k: usize| (k as f64 + 0.5) / n as f64;
    let omega = (0..n)
        .map(|k| {
            let v = 0.55
                + (0..3)
                    .map(|m| a[m] * ((m + 1) as f64 * PI * s(k)).sin())
                    .sum::<f64>();
            v.clamp(0.0, 1.0)
        })
        .collect();
    let delta = (0..n)
        .map(|k| {
            b[0] + (0..3)
                .map(|m| b[m + 1] * ((m + 1) as f64 * 3.0 * s(k)).cos())
                .sum::<f64>()
        })
        .collect();
    Pulse::new(dt, omega, delta, "random").unwrap()
}

fn random_params(rng: &mut ChaCha8Rng) -> SectorParams {
    SectorParams {
        gamma: rng.random_range(0.0..0.05),
        v_int: rng.random_range(-30.0..30.0),
    }
}

fn max_dev(a: &[C64], b: &[C64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let pulse = smooth_pulse(&mut rng);
        let params = random_params(&mut rng);
        let off = Offsets::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1));
        let rec = propagate_dimless(&pulse, params, off, false, false)?;
        let f01 = propagate_full(&pulse, params, off, FullTwoAtomState::basis(0, 1))?;
        let f11 = propagate_full(&pulse, params, off, FullTwoAtomState::basis(1, 1))?;
        worst = worst.max(max_dev(&rec.psi01.0, &full_to_sector01(&f01).0));
        worst = worst.max(max_dev(&rec.psi11.0, &full_to_sector11(&f11).0));
    }
    Ok((
        worst <= 1e-8,
        format!("100 pulses, max amplitude deviation {worst:.2e} (need <= 1e-8)"),
    ))
}

fn amplitudes(rec: &TrajectoryRecord) -> Vec<C64> {
    rec.psi01.0.iter().chain(&rec.psi11.0).cloned().collect()
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let h = 1e-4;
    let mut worst_sens = 0.0f64;
    for _ in 0..50 {
        let pulse = smooth_pulse(&mut rng);
        let params = random_params(&mut rng);
        let rec = propagate_dimless(&pulse, params, Offsets::default(), true, false)?;
        let s = rec.sensitivities.expect("requested");
        for (which, analytic) in [
            (0, [&s.s_omega_01[..], &s.s_omega_11[..]].concat()),
            (1, [&s.s_delta_01[..], &s.s_delta_11[..]].concat()),
        ] {
            let shifted = |sign: f64| -> Result<Vec<C64>> {
                let off = if which == 0 {
                    Offsets::new(sign * h, 0.0)
                } else {
                    Offsets::new(0.0, sign * h)
                };
                Ok(amplitudes(&propagate_dimless(&pulse, params, off, false, false)?))
            };
            let (p, m) = (shifted(1.0)?, shifted(-1.0)?);
            let fd: Vec<C64> = p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * h)).collect();
            let scale = analytic.iter().map(|v| v.norm()).fold(0.0, f64::max);
            worst_sens = worst_sens.max(max_dev(&analytic, &fd) / scale);
        }
    }

    // cost gradient on the default objective, decay-free model
    let v_int = GateConfig::strontium_n61().v_int_dimless();
    let mut problem = OptimizationProblem::preset("protocol-a")?;
    problem.n_steps = 30;
    problem.enforce_zero_endpoints = false;
    let weights = problem.effective_weights();
    let dense = |x: &[f64]| -> Result<f64> {
        let c = Controls::from_vector(x)?;
        let (w, d) = c.values(problem.dt());
        let pulse = Pulse::new(problem.dt(), w, d, "")?;
        let params = SectorParams { gamma: 0.0, v_int };
        let rec = propagate_dimless(&pulse, params, Offsets::default(), true, false)?;
        cost_with(&rec, &c, &weights, problem.target_phase, problem.sensitivity_metric)
    };
    let mut worst_grad = 0.0f64;
    let hg = 1e-6;
    for _ in 0..5 {
        let n = problem.n_steps;
        let c0 = rng.random_range(-0.5..0.5);
        let c1 = rng.random_range(-0.5..0.5);
        let omega: Vec<f64> = (0..n)
            .map(|k| 0.5 + 0.3 * (PI * k as f64 / (n - 1) as f64).sin())
            .collect();
        let delta: Vec<f64> = (0..n)
            .map(|k| c0 + c1 * (2.0 * k as f64 / (n - 1) as f64).cos())
            .collect();
        let c = Controls::from_pulse(&Pulse::new(problem.dt(), omega, delta, "")?);
        let g = gradient(&problem, v_int, &c)?;
        let x = c.to_vector();
        let mut fd = Vec::with_capacity(x.len());
        for i in 0..x.len() {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += hg;
            xm[i] -= hg;
            fd.push((dense(&xp)? - dense(&xm)?) / (2.0 * hg));
        }
        let scale = fd.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = g
            .iter()
            .zip(&fd)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        worst_grad = worst_grad.max(err / scale);
    }
    Ok((
        worst_sens <= 1e-4 && worst_grad <= 1e-5,
        format!(
            "sensitivities rel. dev. {worst_sens:.1e} (need <= 1e-4), cost gradient rel. dev. {worst_grad:.1e} (need <= 1e-5)"
        ),
    ))
}

fn criterion_7(a: &Solved, b: &Solved) -> Outcome {
    let cfg = GateConfig::strontium_n61();
    let mut detail = Vec::new();
    let mut pass = true;
    for (name, s) in [("A", a), ("B", b)] {
        let p = &s.rep.pulse;
        let fine = resample(p, 4 * p.n_steps())?;
        let mut diffs = Vec::new();
        for d in [0.0, PROBE, -PROBE] {
            let f0 = evaluate(p, &cfg, Offsets::new(d, 0.0))?.f;
            let f1 = evaluate(&fine, &cfg, Offsets::new(d, 0.0))?.f;
            diffs.push((f1 - f0).abs());
        }
        pass &= diffs[0] <= 1e-4;
        detail.push(format!(
            "{name} |dF| {:.1e} (at dOmega = +-{PROBE}: {:.1e}, {:.1e})",
            diffs[0], diffs[1], diffs[2]
        ));
    }
    Ok((pass, format!("{} (need <= 1e-4 at zero offset)", detail.join(", "))))
}

fn hydrogen_level(h: &AtomData, n: u32, l: u32, j: f64) -> RydbergLevel {
    let s = h.series.iter().find(|s| s.l == l && s.j == j).unwrap();
    level(s, n).unwrap()
}

fn sixj_orthogonality() -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sixj = |j: [f64; 6]| wigner6j(j[0], j[1], j[2], j[3], j[4], j[5]).unwrap();
    let range = |x: f64, y: f64, u: f64, v: f64| -> Option<Vec<f64>> {
        let lo = (x - y).abs().max((u - v).abs());
        let hi = (x + y).min(u + v);
        if hi < lo || (x + y - lo).fract() != 0.0 || (u + v - lo).fract() != 0.0 {
            return None;
        }
        Some((0..=((hi - lo) as usize)).map(|k| lo + k as f64).collect())
    };
    let mut worst = 0.0f64;
    let mut checked = 0;
    while checked < 40 {
        let mut pick = || rng.random_range(0..=40) as f64 / 2.0;
        let (a, b, c, d) = (pick(), pick(), pick(), pick());
        let (Some(xs), Some(ps)) = (range(a, b, c, d), range(a, d, b, c)) else {
            continue;
        };
        for &p in ps.iter().take(3) {
            for &q in ps.iter().take(3) {
                let sum: f64 = xs
                    .iter()
                    .map(|&x| (2.0 * x + 1.0) * sixj([a, b, x, c, d, p]) * sixj([a, b, x, c, d, q]))
                    .sum();
                let expect = if p == q { 1.0 / (2.0 * p + 1.0) } else { 0.0 };
                worst = worst.max((sum - expect).abs());
            }
        }
        checked += 1;
    }
    worst
}

fn criterion_8() -> Outcome {
    let h = AtomData::hydrogen(1);
    let r = rdme(&hydrogen_level(&h, 1, 0, 0.5), &hydrogen_level(&h, 2, 1, 1.5), 0.0)?;
    let exact = 128.0 * 6f64.sqrt() / 243.0;
    let rdme_err = (r - exact).abs();
    let c = Constants::at_temperature(0.0);
    let mut tau_err = 0.0f64;
    for j in [0.5, 1.5] {
        let t = spontaneous_width(
            &hydrogen_level(&h, 2, 1, j),
            &hydrogen_level(&h, 1, 0, 0.5),
            &h,
            &c,
        )?;
        let tau = TIME_AU / t.gamma_sp;
        tau_err = tau_err.max((tau / 1.596e-9 - 1.0).abs());
    }
    let sixj_err = sixj_orthogonality();
    Ok((
        rdme_err <= 1e-4 && tau_err <= 0.005 && sixj_err <= 1e-12,
        format!(
            "<1s|r|2p> dev {rdme_err:.1e}, tau(2p) dev {:.3}%, 6j orthogonality dev {sixj_err:.1e}",
            100.0 * tau_err
        ),
    ))
}

fn criterion_9(sr: &AtomData) -> Outcome {
    let series = "5sns 3S1";
    let warm = lifetime_scan(sr, series, 40..=120, &Constants::at_temperature(300.0), DEFAULT_N_EXTRA)?;
    let cold = lifetime_scan(sr, series, 40..=120, &Constants::at_temperature(0.0), DEFAULT_N_EXTRA)?;
    let tau61 = warm.rows.iter().find(|r| r.n == 61).unwrap().lifetime * 1e6;
    let slope = cold.log_slope();
    let resid = warm
        .rows
        .iter()
        .filter(|r| r.n >= 60)
        .map(|r| r.fit_residual.abs())
        .fold(0.0, f64::max);
    Ok((
        (80.0..=115.0).contains(&tau61) && (slope - 3.0).abs() <= 0.2 && resid <= 0.05,
        format!(
            "tau(61, 300 K) {tau61:.1} us, spontaneous slope {slope:.3}, max fit residual (n >= 60) {:.2}%",
            100.0 * resid
        ),
    ))
}

fn criterion_10(sr: &AtomData) -> Outcome {
    let series = sr.series("5sns 3S1")?;
    let mut pts = Vec::new();
    let mut worst_r2 = 1.0f64;
    for n in 60..=120 {
        let lvl = level(series, n)?;
        let fields = quadratic_fields(lvl.n_star, 11);
        let (fit, _) = polarisability(sr, &lvl, &fields, StarkBasis::default())?;
        worst_r2 = worst_r2.min(fit.r_squared);
        pts.push((lvl.n_star.ln(), fit.alpha_s.ln()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    Ok((
        (slope - 7.0).abs() <= 0.5 && worst_r2 >= 0.9999,
        format!("alpha_s ~ n*^{slope:.3} over n = 60..120, min R^2 {worst_r2:.7}"),
    ))
}

fn ranking(pulse: &Pulse, table: &[rydberg_cz::staterank::LevelProperties], config: &RankConfig) -> Result<String> {
    let zero = fidelity_vs_n(pulse, table, config, 0.0)?;
    let five = fidelity_vs_n(pulse, table, config, 5.0)?;
    let best = optimal_state(&five).unwrap();
    let dips = zero.windows(2).filter(|w| w[1].fidelity < w[0].fidelity).count();
    let cross = intersection_field(pulse, table, config, 61)?;
    Ok(format!(
        "E=0 decreasing steps {dips}, F(40) {:.4}; E=5 argmax n {} F {:.5}; intersection {}",
        zero[0].fidelity,
        best.props.n,
        best.fidelity,
        match (cross.field, cross.at_lower_edge) {
            (Some(f), false) => format!("{f:.2} mV/cm"),
            (Some(f), true) => format!("<= {f} mV/cm (lower edge)"),
            (None, _) => "above the search bracket".into(),
        }
    ))
}

fn criterion_11(sr: &AtomData, pulse: &Pulse) -> Outcome {
    let config = RankConfig::default();
    let t = Instant::now();
    let table = properties_table(sr, &config)?;
    let zero = fidelity_vs_n(pulse, &table, &config, 0.0)?;
    let five = fidelity_vs_n(pulse, &table, &config, 5.0)?;
    let cross = intersection_field(pulse, &table, &config, 61)?;
    let secs = t.elapsed().as_secs_f64();
    let monotone = zero.windows(2).all(|w| w[1].fidelity >= w[0].fidelity);
    let best = optimal_state(&five).unwrap();
    let in_band = cross
        .field
        .is_some_and(|f| !cross.at_lower_edge && (4.0..=7.0).contains(&f));
    let pass = monotone
        && (55..=75).contains(&best.props.n)
        && best.fidelity >= 0.998
        && in_band
        && secs <= 1800.0;
    let detail = format!("{}; {secs:.0} s", ranking(pulse, &table, &config)?);

    // same table with the blockade held at its anchor ratio
    let fixed = RankConfig {
        blockade: BlockadeScaling::FixedRatio,
        ..config
    };
    let mut alt = table.clone();
    for p in &mut alt {
        p.v_int = scale_blockade(p.n, sr, &fixed)?;
    }
    println!("       note: fixed-ratio blockade gives {}", ranking(pulse, &alt, &fixed)?);
    Ok((pass, detail))
}

fn criterion_12(a: &Solved, sr: &AtomData) -> Outcome {
    let mut problem = OptimizationProblem::preset("protocol-a")?;
    problem.n_steps = 40;
    let cfg = GateConfig::strontium_n61();
    let run = || -> Result<Vec<String>> {
        let rep = multistart_solve(&problem, &cfg, 2, 7)?;
        let grid = sweep(&rep.pulse, &cfg, &linspace(-0.05, 0.05, 5), &linspace(-0.02, 0.02, 5))?;
        let scan = lifetime_scan(sr, "5sns 3S1", 58..=64, &Constants::at_temperature(300.0), DEFAULT_N_EXTRA)?;
        let rank_cfg = RankConfig {
            n_min: 58,
            n_max: 64,
            ..RankConfig::default()
        };
        let table = properties_table(sr, &rank_cfg)?;
        let mut rows = Vec::new();
        for &e in &rank_cfg.fields {
            rows.extend(fidelity_vs_n(&a.rep.pulse, &table, &rank_cfg, e)?);
        }
        Ok(vec![
            pulse_to_json(&rep.pulse),
            grid.to_csv(),
            scan.to_csv(),
            rows_to_csv(&rows),
        ])
    };
    let (first, second) = (run()?, run()?);
    let same_runs = first == second;
    let bundled = std::fs::read_to_string(
        Path::new(env!("CARGO_MANIFEST_DIR")).join("data/protocol_a.json"),
    )?;
    let same_bundle = bundled == pulse_to_json(&a.rep.pulse);
    Ok((
        same_runs && same_bundle,
        format!(
            "pulse/sweep/lifetime/rank outputs identical across runs: {same_runs}; \
             Protocol-A pulse identical to the bundled file: {same_bundle}"
        ),
    ))
}

fn main() -> ExitCode {
    // `cargo test` forwards harness flags; listing must not run the suite.
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut tally = Tally { failed: Vec::new() };
    let sr = AtomData::strontium88();
    let (a, b, t) = match (solve("protocol-a"), solve("protocol-b"), solve("time-optimal-style")) {
        (Ok(a), Ok(b), Ok(t)) => (a, b, t),
        (a, b, t) => {
            for e in [a.err(), b.err(), t.err()].into_iter().flatten() {
                println!("optimizer error: {e}");
            }
            for id in [1, 2, 3, 4, 7, 11, 12] {
                tally.report(id, "optimizer-dependent", Ok((false, "no solution".into())));
            }
            return ExitCode::FAILURE;
        }
    };
    tally.report(1, "noiseless gate quality", criterion_1(&a));
    tally.report(2, "Protocol A robustness", robustness(&a, 0.995, 5.2));
    tally.report(3, "Protocol B robustness", robustness(&b, 0.998, 6.2));
    tally.report(4, "robustness ordering", criterion_4(&a, &b, &t));
    tally.report(5, "sector vs full propagation", criterion_5());
    tally.report(6, "sensitivities and gradients", criterion_6());
    tally.report(7, "time discretisation", criterion_7(&a, &b));
    tally.report(8, "atomic oracles", criterion_8());
    tally.report(9, "Sr lifetimes", criterion_9(&sr));
    tally.report(10, "polarisability scaling", criterion_10(&sr));
    tally.report(11, "state ranking", criterion_11(&sr, &a.rep.pulse));
    tally.report(12, "determinism", criterion_12(&a, &sr));
    let passed = 12 - tally.failed.len();
    println!("acceptance: {passed}/12 criteria pass");
    if !tally.failed.is_empty() && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        return ExitCode::FAILURE;
    }
    ExitCode::SUCCESS
}
