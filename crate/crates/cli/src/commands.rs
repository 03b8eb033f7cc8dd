// Copyright 2026 The rydberg-cz Contributors
// SPDX-License-Identifier: Apache-2.0

//! Subcommand implementations.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use rydberg_cz::atomic::{
    fit_polarisability, level, lifetime_scan, quadratic_fields, stark_map, Constants,
};
use rydberg_cz::dynamics::Offsets;
use rydberg_cz::error::Error;
use rydberg_cz::fidelity::{evaluate, linspace, sweep as sweep_grid, wrap_angle};
use rydberg_cz::optimizer::{multistart_solve, ROBUSTNESS_PROBE};
use rydberg_cz::pulse::{load_pulse, save_pulse, Pulse};
use rydberg_cz::staterank::{
    fidelity_vs_n, intersection_field, optimal_state, properties_table, reference_pulse,
    report_header, rows_to_csv, BlockadeScaling,
};

use crate::{Globals, LifetimeArgs, OptimizeArgs, RankArgs, SimulateArgs, StarkArgs, SweepArgs};

/// Exit code for an error: 2 for numerical failures, 1 for everything else.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(
            Error::Numeric(_)
            | Error::Fit(_)
            | Error::NonQuadratic { .. }
            | Error::Integration(_),
        ) => 2,
        _ => 1,
    }
}

fn header(globals: &Globals) -> String {
    if globals.timestamp {
        format!(
            "# generated {}\n",
            chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
        )
    } else {
        String::new()
    }
}

fn write_out(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn read_pulse(path: &Path) -> Result<Pulse> {
    load_pulse(path).with_context(|| format!("cannot load pulse {}", path.display()))
}

/// `lo:hi:count` or a comma-separated list.
pub fn parse_axis(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |s: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .map_err(|_| anyhow!("bad number {s:?} in axis {spec:?}"))
    };
    match parts.as_slice() {
        [lo, hi, count] => {
            let n: usize = count
                .trim()
                .parse()
                .map_err(|_| anyhow!("bad point count {count:?} in axis {spec:?}"))?;
            if n == 0 {
                bail!("axis {spec:?} has no points");
            }
            Ok(linspace(num(lo)?, num(hi)?, n))
        }
        [list] => list.split(',').map(num).collect(),
        _ => bail!("axis {spec:?} must be lo:hi:count or a comma list"),
    }
}

fn optimize_report(globals: &Globals, rep: &rydberg_cz::optimizer::SolveReport, preset: &str, starts: usize) -> Result<String> {
    let gate = globals.config.gate()?;
    let clean = evaluate(&rep.pulse, &gate.without_decay(), Offsets::default())?;
    let plus = evaluate(&rep.pulse, &gate, Offsets::new(ROBUSTNESS_PROBE, 0.0))?;
    let minus = evaluate(&rep.pulse, &gate, Offsets::new(-ROBUSTNESS_PROBE, 0.0))?;
    let mut s = header(globals);
    writeln!(s, "preset            {preset}")?;
    writeln!(s, "seed              {} (best of {starts} starts from {})", rep.seed, globals.seed)?;
    writeln!(s, "converged         {}", rep.converged)?;
    writeln!(s, "violation         {:.3e}", rep.violation)?;
    writeln!(s, "phase error       {:.3e} rad", wrap_angle(clean.phi - std::f64::consts::PI))?;
    writeln!(s, "p_tot - 4         {:.3e}", clean.p_tot - 4.0)?;
    writeln!(s, "1 - F (no decay)  {:.3e}", clean.infidelity())?;
    writeln!(s, "F (decay)         {:.6}", rep.report.f)?;
    writeln!(s, "F (dOmega=+{ROBUSTNESS_PROBE}) {:.6}", plus.f)?;
    writeln!(s, "F (dOmega=-{ROBUSTNESS_PROBE}) {:.6}", minus.f)?;
    writeln!(s, "T_r (1/Omega_max) {:.4}", rep.report.t_bar_r)?;
    writeln!(s, "max |Delta|       {:.6}", rep.pulse.max_abs_delta())?;
    writeln!(s, "iterations        {} outer, {} inner", rep.outer_iterations, rep.inner_iterations)?;
    if !rep.converged {
        writeln!(s, "start violations:")?;
        for (seed, v) in &rep.start_violations {
            writeln!(s, "  seed {seed}: {v:.3e}")?;
        }
    }
    Ok(s)
}

fn report_path(out: &Path) -> PathBuf {
    out.with_extension("report.txt")
}

pub fn optimize(globals: &Globals, args: OptimizeArgs) -> Result<ExitCode> {
    let mut problem = globals.config.problem(args.preset.as_deref())?;
    if let Some(t) = args.horizon {
        problem.horizon = t;
    }
    if let Some(n) = args.steps {
        problem.n_steps = n;
    }
    problem.validate()?;
    let gate = globals.config.gate()?;
    let starts = args.starts.unwrap_or(globals.config.starts());
    let rep = multistart_solve(&problem, &gate, starts, globals.seed)?;
    let text = optimize_report(globals, &rep, &problem.name, starts)?;
    save_pulse(&rep.pulse, &args.out)
        .with_context(|| format!("cannot write {}", args.out.display()))?;
    write_out(&report_path(&args.out), &text)?;
    print!("{text}");
    if rep.converged {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!(
            "not converged: best constraint violation {:.3e} exceeds {:.1e}",
            rep.violation, problem.constraint_tol
        );
        Ok(ExitCode::from(2))
    }
}

pub fn simulate(globals: &Globals, args: SimulateArgs) -> Result<ExitCode> {
    let pulse = read_pulse(&args.pulse)?;
    let mut gate = globals.config.gate()?;
    if args.no_decay {
        gate = gate.without_decay();
    }
    let r = evaluate(&pulse, &gate, Offsets::new(args.d_omega, args.d_delta))?;
    println!("d_omega   {}", args.d_omega);
    println!("d_delta   {}", args.d_delta);
    println!("F         {}", r.f);
    println!("1 - F     {:.3e}", r.infidelity());
    println!("theta_opt {:.10}", r.theta_opt);
    println!("phi       {:.10}", r.phi);
    println!("p_tot     {:.10}", r.p_tot);
    println!("T_r       {:.6}", r.t_bar_r);
    Ok(ExitCode::SUCCESS)
}

pub fn sweep(globals: &Globals, args: SweepArgs) -> Result<ExitCode> {
    let pulse = read_pulse(&args.pulse)?;
    let gate = globals.config.gate()?;
    let w = parse_axis(&args.omega_axis)?;
    let d = parse_axis(&args.delta_axis)?;
    let grid = sweep_grid(&pulse, &gate, &w, &d)?;
    write_out(&args.out, &(header(globals) + &grid.to_csv()))?;
    let best = grid
        .values
        .iter()
        .flatten()
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let worst = grid.values.iter().flatten().fold(f64::INFINITY, |a, &b| a.min(b));
    println!("{}x{} grid, F in [{worst:.6}, {best:.6}]", w.len(), d.len());
    Ok(ExitCode::SUCCESS)
}

pub fn lifetime(globals: &Globals, args: LifetimeArgs) -> Result<ExitCode> {
    let atom = globals.config.atom()?;
    let temperature = args.temperature.unwrap_or(globals.config.atomic.temperature);
    let scan = lifetime_scan(
        &atom,
        &args.series,
        args.n_min..=args.n_max,
        &Constants::at_temperature(temperature),
        globals.config.atomic.n_extra,
    )?;
    let worst = scan
        .rows
        .iter()
        .map(|r| r.fit_residual.abs())
        .fold(0.0, f64::max);
    let mut text = header(globals);
    writeln!(text, "# {} at T = {temperature} K", scan.series)?;
    writeln!(text, "# {}; max |residual| {worst:.3e}", scan.fit_line())?;
    text.push_str(&scan.to_csv());
    write_out(&args.out, &text)?;
    println!("{}", scan.fit_line());
    println!("max relative residual {worst:.3e}");
    println!("log-log slope of tau vs n* {:.4}", scan.log_slope());
    Ok(ExitCode::SUCCESS)
}

pub fn stark(globals: &Globals, args: StarkArgs) -> Result<ExitCode> {
    let atom = globals.config.atom()?;
    let lvl = level(atom.series(&args.series)?, args.n)?;
    let fields = match &args.fields {
        Some(spec) => parse_axis(spec)?,
        None => quadratic_fields(lvl.n_star, 11),
    };
    let map = stark_map(&atom, &lvl, &fields, globals.config.stark_basis())?;
    let mut text = header(globals);
    writeln!(text, "# {} n = {} (n* = {:.6}), basis size {}", args.series, args.n, lvl.n_star, map.basis_size)?;
    if let Some(w) = &map.warning {
        writeln!(text, "# warning: {w}")?;
        eprintln!("warning: {w}");
    }
    let fit = fit_polarisability(&map.fields, &map.shifts)?;
    let check = fit.check_quadratic();
    writeln!(
        text,
        "# alpha_s = {:.6e} au ({:.6e} Hz/(V/m)^2), R^2 = {:.8}, quartic ratio {:.3e}",
        fit.alpha_s,
        fit.alpha_hz(),
        fit.r_squared,
        fit.quartic_ratio
    )?;
    if let Err(e) = &check {
        writeln!(text, "# warning: {e}")?;
    }
    text.push_str(&map.to_csv());
    write_out(&args.out, &text)?;
    println!("alpha_s = {:.6e} au = {:.6e} Hz/(V/m)^2", fit.alpha_s, fit.alpha_hz());
    println!("R^2 = {:.8}, quartic ratio {:.3e}", fit.r_squared, fit.quartic_ratio);
    match check {
        Ok(()) => Ok(ExitCode::SUCCESS),
        Err(e) => {
            eprintln!("warning: {e}");
            Ok(ExitCode::from(2))
        }
    }
}

pub fn rank(globals: &Globals, args: RankArgs) -> Result<ExitCode> {
    let atom = globals.config.atom()?;
    let mut config = globals.config.rank.clone();
    if let Some(spec) = &args.fields {
        config.fields = parse_axis(spec)?;
    }
    if let Some(b) = &args.blockade {
        config.blockade = match b.as_str() {
            "van-der-waals" => BlockadeScaling::VanDerWaals,
            "fixed-ratio" => BlockadeScaling::FixedRatio,
            other => bail!("unknown blockade scaling {other:?}; expected van-der-waals or fixed-ratio"),
        };
    }
    config.validate()?;
    let pulse = match &args.pulse {
        Some(p) => read_pulse(p)?,
        None => reference_pulse(),
    };
    let table = properties_table(&atom, &config)?;
    let mut rows = Vec::new();
    let mut summary = String::new();
    for &e in &config.fields {
        let block = fidelity_vs_n(&pulse, &table, &config, e)?;
        let best = optimal_state(&block).ok_or_else(|| anyhow!("empty n axis"))?;
        writeln!(
            summary,
            "# E = {e} mV/cm: optimal n = {}, F = {:.6}",
            best.props.n, best.fidelity
        )?;
        rows.extend(block);
    }
    let cross = intersection_field(&pulse, &table, &config, args.n_ref)?;
    match (cross.field, cross.at_lower_edge) {
        (Some(f), false) => writeln!(summary, "# intersection with n = {}: {f:.2} mV/cm", args.n_ref)?,
        (Some(f), true) => writeln!(
            summary,
            "# intersection with n = {}: at or below {f} mV/cm (lower edge of the search)",
            args.n_ref
        )?,
        (None, _) => writeln!(
            summary,
            "# intersection with n = {}: not found up to the upper edge of the search",
            args.n_ref
        )?,
    }
    let text = header(globals) + &report_header(&config) + &summary + &rows_to_csv(&rows);
    write_out(&args.out, &text)?;
    print!("{}", summary.replace("# ", ""));
    Ok(ExitCode::SUCCESS)
}
