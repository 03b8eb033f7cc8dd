// Copyright 2026 The rydberg-cz Contributors
// SPDX-License-Identifier: Apache-2.0

//! End-to-end behaviour of the augmented-Lagrangian solver on small grids.

use std::f64::consts::PI;

use rydberg_cz::dynamics::Offsets;
use rydberg_cz::fidelity::{evaluate, wrap_angle};
use rydberg_cz::optimizer::{alm_solve, multistart_solve, InitStrategy, OptimizationProblem};
use rydberg_cz::pulse::{pulse_to_json, GateConfig};

fn coarse_protocol_a() -> OptimizationProblem {
    let mut p = OptimizationProblem::preset("protocol-a").unwrap();
    p.n_steps = 40;
    p
}

#[test]
fn converged_pulse_meets_constraints_and_bounds() {
    let problem = coarse_protocol_a();
    let cfg = GateConfig::strontium_n61();
    let rep = alm_solve(&problem, &cfg, InitStrategy::SmoothRandom, 1).unwrap();
    assert!(rep.converged, "violation {:e}", rep.violation);
    assert!(rep.violation <= problem.constraint_tol);
    let clean = evaluate(&rep.pulse, &cfg.without_decay(), Offsets::default()).unwrap();
    assert!(wrap_angle(clean.phi - PI).abs() <= 1e-5);
    assert!((clean.p_tot - 4.0).abs() <= 1e-5);
    assert!(rep
        .pulse
        .omega()
        .iter()
        .all(|w| (0.0..=1.0 + 1e-9).contains(w)));
    assert!(rep.pulse.max_abs_delta() <= problem.delta_bound + 1e-9);
    assert_eq!(rep.pulse.omega()[0], 0.0);
    assert_eq!(*rep.pulse.omega().last().unwrap(), 0.0);
    assert!(rep.violation_history.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn too_short_gate_is_reported_not_converged() {
    let mut problem = OptimizationProblem::preset("protocol-a").unwrap();
    problem.horizon = 0.1;
    problem.n_steps = 20;
    let rep = alm_solve(
        &problem,
        &GateConfig::strontium_n61(),
        InitStrategy::SmoothRandom,
        4,
    )
    .unwrap();
    assert!(!rep.converged);
    assert!(rep.violation > problem.constraint_tol);
    assert!(rep.violation_history.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn solves_are_deterministic_and_single_start_matches() {
    let mut problem = coarse_protocol_a();
    problem.n_steps = 30;
    let cfg = GateConfig::strontium_n61();
    let a = alm_solve(&problem, &cfg, InitStrategy::SmoothRandom, 9).unwrap();
    let b = alm_solve(&problem, &cfg, InitStrategy::SmoothRandom, 9).unwrap();
    assert_eq!(pulse_to_json(&a.pulse), pulse_to_json(&b.pulse));
    let m = multistart_solve(&problem, &cfg, 1, 9).unwrap();
    assert_eq!(pulse_to_json(&m.pulse), pulse_to_json(&a.pulse));
    assert_eq!(m.converged, a.converged);
    assert_eq!(m.start_violations, vec![(9, a.violation)]);
}

#[test]
fn unknown_preset_lists_the_choices() {
    let err = OptimizationProblem::preset("protocol-z")
        .unwrap_err()
        .to_string();
    for name in ["protocol-a", "protocol-b", "time-optimal-style"] {
        assert!(err.contains(name), "{err}");
    }
}
