// Copyright 2026 The rydberg-cz Contributors
// SPDX-License-Identifier: Apache-2.0

//! Two-atom blockade dynamics.
//!
//! A symmetric pulse acting on two atoms splits into independent sectors:
//!
//! * `|01⟩` (and identically `|10⟩`) couples only to `|0r⟩`, a two-level
//!   system with Rabi frequency `Ω`;
//! * `|11⟩` couples to the bright state `|b⟩ = (|1r⟩ + |r1⟩)/√2` with
//!   `√2·Ω`, which in turn couples to `|rr⟩`, shifted by the interaction.
//!
//! `|00⟩` is dark. Decay of `|r⟩` enters as the non-Hermitian term
//! `-iΓ/2 |r⟩⟨r|` per atom, so `|rr⟩` decays at `2Γ`.
//!
//! Each pulse step is propagated exactly with a matrix exponential. The
//! parameter sensitivities `∂Ψ/∂δΩ` and `∂Ψ/∂δΔ` obey
//! `i ṡ = H s + (∂H/∂μ) Ψ`, which is integrated alongside `Ψ` by
//! exponentiating the block upper-triangular generator `[[H, ∂H/∂μ], [0, H]]`.
//! [`h_full`] builds the literal 9-dimensional Hamiltonian as an oracle for
//! the sector reduction.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, SMatrix};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pulse::{GateConfig, Pulse};

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Amplitudes over `{|01⟩, |0r⟩}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector01State(pub [C64; 2]);

/// Amplitudes over `{|11⟩, |b⟩, |rr⟩}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sector11State(pub [C64; 3]);

/// Amplitudes over `{0,1,r} ⊗ {0,1,r}`, index `3a + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FullTwoAtomState(pub [C64; 9]);

impl Sector01State {
    pub fn initial() -> Self {
        Self([ONE, ZERO])
    }
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(C64::norm_sqr).sum()
    }
}

impl Sector11State {
    pub fn initial() -> Self {
        Self([ONE, ZERO, ZERO])
    }
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(C64::norm_sqr).sum()
    }
}

impl FullTwoAtomState {
    pub fn basis(a: usize, b: usize) -> Self {
        let mut amps = [ZERO; 9];
        amps[3 * a + b] = ONE;
        Self(amps)
    }
    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(C64::norm_sqr).sum()
    }
}

/// A state in one of the dynamical bases, for the generic helpers.
pub trait SectorState {
    fn amplitudes(&self) -> &[C64];
    /// Eigenvalues of the Rydberg-number operator on each basis state.
    fn rydberg_counts(&self) -> &'static [f64];
}

impl SectorState for Sector01State {
    fn amplitudes(&self) -> &[C64] {
        &self.0
    }
    fn rydberg_counts(&self) -> &'static [f64] {
        &[0.0, 1.0]
    }
}

impl SectorState for Sector11State {
    fn amplitudes(&self) -> &[C64] {
        &self.0
    }
    fn rydberg_counts(&self) -> &'static [f64] {
        &[0.0, 1.0, 2.0]
    }
}

impl SectorState for FullTwoAtomState {
    fn amplitudes(&self) -> &[C64] {
        &self.0
    }
    fn rydberg_counts(&self) -> &'static [f64] {
        &[0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 1.0, 1.0, 2.0]
    }
}

/// `⟨Ψ| n̂ |Ψ⟩` with `n̂ = |r⟩⟨r| ⊗ I + I ⊗ |r⟩⟨r|`.
pub fn rydberg_population<S: SectorState>(state: &S) -> f64 {
    state
        .amplitudes()
        .iter()
        .zip(state.rydberg_counts())
        .map(|(a, n)| n * a.norm_sqr())
        .sum()
}

/// Parameter sensitivities `∂Ψ/∂δΩ` and `∂Ψ/∂δΔ` for both sectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensitivityBundle {
    pub s_omega_01: [C64; 2],
    pub s_omega_11: [C64; 3],
    pub s_delta_01: [C64; 2],
    pub s_delta_11: [C64; 3],
}

impl SensitivityBundle {
    pub fn zero() -> Self {
        Self {
            s_omega_01: [ZERO; 2],
            s_omega_11: [ZERO; 3],
            s_delta_01: [ZERO; 2],
            s_delta_11: [ZERO; 3],
        }
    }

    pub fn omega_norm_sqr(&self) -> f64 {
        self.s_omega_01
            .iter()
            .chain(&self.s_omega_11)
            .map(C64::norm_sqr)
            .sum()
    }

    pub fn delta_norm_sqr(&self) -> f64 {
        self.s_delta_01
            .iter()
            .chain(&self.s_delta_11)
            .map(C64::norm_sqr)
            .sum()
    }
}

/// Everything a propagation produces.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub psi01: Sector01State,
    pub psi11: Sector11State,
    /// Present when sensitivities were requested.
    pub sensitivities: Option<SensitivityBundle>,
    /// `∫ ⟨n̂⟩ dt` for the `|01⟩` input (units `1/Ω_max`).
    pub t_r01: f64,
    /// `∫ ⟨n̂⟩ dt` for the `|11⟩` input.
    pub t_r11: f64,
    pub phi01: f64,
    pub phi11: f64,
    /// States at `t = k·dt`, `k = 0..=n_steps`, when requested.
    pub history: Option<Vec<(Sector01State, Sector11State)>>,
    pub dt: f64,
}

impl TrajectoryRecord {
    /// CSV of the state history: `step,t` then real/imaginary parts of every
    /// sector amplitude. `None` when the history was not recorded.
    pub fn history_csv(&self) -> Option<String> {
        let history = self.history.as_ref()?;
        let mut out =
            String::from("step,t,re_01,im_01,re_0r,im_0r,re_11,im_11,re_b,im_b,re_rr,im_rr\n");
        for (k, (s01, s11)) in history.iter().enumerate() {
            write!(out, "{k},{:.16e}", k as f64 * self.dt).unwrap();
            for a in s01.0.iter().chain(&s11.0) {
                write!(out, ",{:.16e},{:.16e}", a.re, a.im).unwrap();
            }
            out.push('\n');
        }
        Some(out)
    }
}

/// Single-atom-pair `|01⟩` sector Hamiltonian.
pub fn h01(omega: f64, delta: f64, gamma: f64) -> Matrix2<C64> {
    let c = re(omega / 2.0);
    Matrix2::new(ZERO, c, c, C64::new(-delta, -gamma / 2.0))
}

/// `|11⟩` sector Hamiltonian over `{|11⟩, |b⟩, |rr⟩}`.
pub fn h11(omega: f64, delta: f64, gamma: f64, v_int: f64) -> Matrix3<C64> {
    let c = re(std::f64::consts::SQRT_2 * omega / 2.0);
    Matrix3::new(
        ZERO,
        c,
        ZERO,
        c,
        C64::new(-delta, -gamma / 2.0),
        c,
        ZERO,
        c,
        C64::new(v_int - 2.0 * delta, -gamma),
    )
}

/// Single atom over `{|0⟩, |1⟩, |r⟩}`; `|0⟩` is uncoupled.
fn h_single(omega: f64, delta: f64, gamma: f64) -> Matrix3<C64> {
    let mut h = Matrix3::zeros();
    h.fixed_view_mut::<2, 2>(1, 1)
        .copy_from(&h01(omega, delta, gamma));
    h
}

/// Literal two-atom Hamiltonian `H ⊗ I + I ⊗ H + V |rr⟩⟨rr|`.
pub fn h_full(omega: f64, delta: f64, gamma: f64, v_int: f64) -> SMatrix<C64, 9, 9> {
    let h1 = h_single(omega, delta, gamma);
    let mut h = SMatrix::<C64, 9, 9>::zeros();
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                // H ⊗ I: <a b| H1 ⊗ I |c b>
                h[(3 * a + b, 3 * c + b)] += h1[(a, c)];
                // I ⊗ H: <a b| I ⊗ H1 |a c>
                h[(3 * a + b, 3 * a + c)] += h1[(b, c)];
            }
        }
    }
    h[(8, 8)] += re(v_int);
    h
}

fn check_finite(h: &DMatrix<C64>) -> Result<()> {
    if h.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NumericInput(
            "Hamiltonian has non-finite entries".into(),
        ))
    }
}

/// `exp(-i H dt)` by Padé scaling and squaring.
pub fn step_propagator(h: &DMatrix<C64>, dt: f64) -> Result<DMatrix<C64>> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "dt must be positive, got {dt}"
        )));
    }
    check_finite(h)?;
    let gen = h * C64::new(0.0, -dt);
    let u = gen.exp();
    if u.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Numeric("matrix exponential overflowed".into()));
    }
    Ok(u)
}

/// Applies `exp(-i H dt)` to `state`.
pub fn step_propagate(h: &DMatrix<C64>, state: &DVector<C64>, dt: f64) -> Result<DVector<C64>> {
    if h.nrows() != h.ncols() || h.nrows() != state.len() {
        return Err(Error::InvalidArgument("dimension mismatch".into()));
    }
    if state.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NumericInput("state has non-finite entries".into()));
    }
    Ok(step_propagator(h, dt)? * state)
}

/// Constant control offsets `(δΩ, δΔ)` in `Ω_max` units.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Offsets {
    pub d_omega: f64,
    pub d_delta: f64,
}

impl Offsets {
    pub fn new(d_omega: f64, d_delta: f64) -> Self {
        Self { d_omega, d_delta }
    }
}

/// Dimensionless physical parameters seen by the propagator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SectorParams {
    /// `Γ / Ω_max`.
    pub gamma: f64,
    /// `V_int / Ω_max`.
    pub v_int: f64,
}

impl From<&GateConfig> for SectorParams {
    fn from(cfg: &GateConfig) -> Self {
        Self {
            gamma: cfg.gamma_dimless(),
            v_int: cfg.v_int_dimless(),
        }
    }
}

fn to_dmatrix<const D: usize>(m: &SMatrix<C64, D, D>) -> DMatrix<C64> {
    DMatrix::from_iterator(D, D, m.iter().cloned())
}

/// Block generator `[[H, 0, ∂ΩH], [0, H, ∂ΔH], [0, 0, H]]` acting on
/// `(s_Ω, s_Δ, Ψ)`. Only the Ω block when `with_delta` is false.
fn augmented<const D: usize>(
    h: &SMatrix<C64, D, D>,
    d_omega: &SMatrix<C64, D, D>,
    d_delta: &SMatrix<C64, D, D>,
) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(3 * D, 3 * D);
    for blk in 0..3 {
        m.view_mut((blk * D, blk * D), (D, D)).copy_from(h);
    }
    m.view_mut((0, 2 * D), (D, D)).copy_from(d_omega);
    m.view_mut((D, 2 * D), (D, D)).copy_from(d_delta);
    m
}

fn d_omega_01() -> Matrix2<C64> {
    h01(1.0, 0.0, 0.0)
}

fn d_delta_01() -> Matrix2<C64> {
    h01(0.0, 1.0, 0.0)
}

fn d_omega_11() -> Matrix3<C64> {
    h11(1.0, 0.0, 0.0, 0.0)
}

fn d_delta_11() -> Matrix3<C64> {
    h11(0.0, 1.0, 0.0, 0.0)
}

struct SectorRun<const D: usize> {
    psi: [C64; D],
    s_omega: [C64; D],
    s_delta: [C64; D],
    t_r: f64,
    history: Vec<[C64; D]>,
}

fn run_sector<const D: usize>(
    pulse: &Pulse,
    offsets: Offsets,
    hamiltonian: impl Fn(f64, f64) -> SMatrix<C64, D, D>,
    d_omega: SMatrix<C64, D, D>,
    d_delta: SMatrix<C64, D, D>,
    counts: &[f64],
    want_sensitivities: bool,
    want_history: bool,
) -> Result<SectorRun<D>> {
    let dt = pulse.dt();
    let mut psi = DVector::<C64>::zeros(D);
    psi[0] = ONE;
    let mut aug = DVector::<C64>::zeros(3 * D);
    aug[2 * D] = ONE;
    let pop = |v: &[C64]| -> f64 { v.iter().zip(counts).map(|(a, n)| n * a.norm_sqr()).sum() };
    let mut t_r = 0.0;
    let mut history = Vec::new();
    let mut n_prev = 0.0;
    if want_history {
        let mut s = [ZERO; D];
        s[0] = ONE;
        history.push(s);
    }
    for (&w, &d) in pulse.omega().iter().zip(pulse.delta()) {
        let h = hamiltonian(w + offsets.d_omega, d + offsets.d_delta);
        let current: Vec<C64> = if want_sensitivities {
            let u = step_propagator(&augmented(&h, &d_omega, &d_delta), dt)?;
            aug = u * &aug;
            aug.rows(2 * D, D).iter().cloned().collect()
        } else {
            psi = step_propagate(&to_dmatrix(&h), &psi, dt)?;
            psi.iter().cloned().collect()
        };
        let n_next = pop(&current);
        t_r += 0.5 * dt * (n_prev + n_next);
        n_prev = n_next;
        if want_history {
            let mut s = [ZERO; D];
            s.copy_from_slice(&current);
            history.push(s);
        }
    }
    let mut out = SectorRun {
        psi: [ZERO; D],
        s_omega: [ZERO; D],
        s_delta: [ZERO; D],
        t_r,
        history,
    };
    if want_sensitivities {
        for i in 0..D {
            out.s_omega[i] = aug[i];
            out.s_delta[i] = aug[D + i];
            out.psi[i] = aug[2 * D + i];
        }
    } else {
        for i in 0..D {
            out.psi[i] = psi[i];
        }
    }
    Ok(out)
}

/// Propagates the `|01⟩` and `|11⟩` sectors through `pulse` with constant
/// control offsets.
pub fn propagate(
    pulse: &Pulse,
    config: &GateConfig,
    offsets: Offsets,
    want_sensitivities: bool,
    want_history: bool,
) -> Result<TrajectoryRecord> {
    config.validate()?;
    propagate_dimless(
        pulse,
        SectorParams::from(config),
        offsets,
        want_sensitivities,
        want_history,
    )
}

/// [`propagate`] with the physical parameters already in `Ω_max` units.
pub fn propagate_dimless(
    pulse: &Pulse,
    params: SectorParams,
    offsets: Offsets,
    want_sensitivities: bool,
    want_history: bool,
) -> Result<TrajectoryRecord> {
    if !offsets.d_omega.is_finite() || !offsets.d_delta.is_finite() {
        return Err(Error::NumericInput("non-finite offsets".into()));
    }
    let SectorParams { gamma, v_int } = params;
    let r01 = run_sector(
        pulse,
        offsets,
        |w, d| h01(w, d, gamma),
        d_omega_01(),
        d_delta_01(),
        &[0.0, 1.0],
        want_sensitivities,
        want_history,
    )?;
    let r11 = run_sector(
        pulse,
        offsets,
        |w, d| h11(w, d, gamma, v_int),
        d_omega_11(),
        d_delta_11(),
        &[0.0, 1.0, 2.0],
        want_sensitivities,
        want_history,
    )?;
    let sensitivities = want_sensitivities.then(|| SensitivityBundle {
        s_omega_01: r01.s_omega,
        s_omega_11: r11.s_omega,
        s_delta_01: r01.s_delta,
        s_delta_11: r11.s_delta,
    });
    let history = want_history.then(|| {
        r01.history
            .iter()
            .zip(&r11.history)
            .map(|(a, b)| (Sector01State(*a), Sector11State(*b)))
            .collect()
    });
    Ok(TrajectoryRecord {
        psi01: Sector01State(r01.psi),
        psi11: Sector11State(r11.psi),
        sensitivities,
        t_r01: r01.t_r,
        t_r11: r11.t_r,
        phi01: r01.psi[0].arg(),
        phi11: r11.psi[0].arg(),
        history,
        dt: pulse.dt(),
    })
}

/// Propagates an arbitrary two-atom state with the 9-dimensional Hamiltonian.
pub fn propagate_full(
    pulse: &Pulse,
    params: SectorParams,
    offsets: Offsets,
    initial: FullTwoAtomState,
) -> Result<FullTwoAtomState> {
    let mut psi = DVector::from_column_slice(&initial.0);
    for (&w, &d) in pulse.omega().iter().zip(pulse.delta()) {
        let h = h_full(
            w + offsets.d_omega,
            d + offsets.d_delta,
            params.gamma,
            params.v_int,
        );
        psi = step_propagate(&to_dmatrix(&h), &psi, pulse.dt())?;
    }
    let mut out = [ZERO; 9];
    out.copy_from_slice(psi.as_slice());
    Ok(FullTwoAtomState(out))
}

/// Projects a full state onto the `|01⟩` sector basis.
pub fn full_to_sector01(full: &FullTwoAtomState) -> Sector01State {
    Sector01State([full.0[1], full.0[2]])
}

/// Projects a full state onto `{|11⟩, |b⟩, |rr⟩}`.
pub fn full_to_sector11(full: &FullTwoAtomState) -> Sector11State {
    let b = (full.0[5] + full.0[7]) * FRAC_1_SQRT_2;
    Sector11State([full.0[4], b, full.0[8]])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn h01_entries() {
        assert_eq!(h01(0.0, 0.0, 0.0), Matrix2::zeros());
        let h = h01(1.0, 0.0, 0.0);
        assert_eq!(h[(0, 1)], re(0.5));
        assert_eq!(h[(1, 0)], re(0.5));
        assert_eq!(h[(1, 1)], ZERO);
        let h = h01(0.5, 0.3, 0.1);
        assert!(close(h[(1, 1)], C64::new(-0.3, -0.05), 1e-15));
        assert_eq!(h[(0, 0)], ZERO);
    }

    #[test]
    fn h11_entries() {
        assert_eq!(h11(0.0, 0.0, 0.0, 0.0), Matrix3::zeros());
        let h = h11(1.0, 0.0, 0.0, 7.0);
        let c = std::f64::consts::SQRT_2 / 2.0;
        assert!(close(h[(0, 1)], re(c), 1e-15));
        assert!(close(h[(1, 2)], re(c), 1e-15));
        assert_eq!(h[(2, 2)], re(7.0));
    }

    #[test]
    fn h11_is_symmetric_restriction_of_h_full() {
        let (w, d, g, v) = (0.73, -0.41, 0.013, 9.2);
        let full = h_full(w, d, g, v);
        let s = FRAC_1_SQRT_2;
        // columns of the isometry |11>, |b>, |rr>
        let mut p = SMatrix::<C64, 9, 3>::zeros();
        p[(4, 0)] = ONE;
        p[(5, 1)] = re(s);
        p[(7, 1)] = re(s);
        p[(8, 2)] = ONE;
        let restricted = p.adjoint() * full * p;
        let h = h11(w, d, g, v);
        for i in 0..3 {
            for j in 0..3 {
                assert!(close(restricted[(i, j)], h[(i, j)], 1e-15));
            }
        }
    }

    #[test]
    fn h_full_structure() {
        assert_eq!(h_full(0.0, 0.0, 0.0, 0.0), SMatrix::<C64, 9, 9>::zeros());
        let h = h_full(0.0, 0.0, 0.0, 3.0);
        let nonzero: Vec<_> = h
            .iter()
            .enumerate()
            .filter(|(_, z)| z.norm() > 0.0)
            .collect();
        assert_eq!(nonzero.len(), 1);
        assert_eq!(h[(8, 8)], re(3.0));
        let h = h_full(0.9, 0.4, 0.2, 5.0);
        for k in 0..9 {
            assert_eq!(h[(0, k)], ZERO);
            assert_eq!(h[(k, 0)], ZERO);
        }
    }

    #[test]
    fn zero_hamiltonian_keeps_state() {
        let h = DMatrix::<C64>::zeros(3, 3);
        let s = DVector::from_vec(vec![re(0.6), C64::new(0.0, 0.8), ZERO]);
        let out = step_propagate(&h, &s, 0.7).unwrap();
        assert!((out - s).norm() < 1e-15);
    }

    #[test]
    fn full_rabi_flop() {
        // Ω = 1, t = π: |1> -> -i|r>
        let h = to_dmatrix(&h01(1.0, 0.0, 0.0));
        let s = DVector::from_vec(vec![ONE, ZERO]);
        let out = step_propagate(&h, &s, PI).unwrap();
        assert!(close(out[0], ZERO, 1e-13));
        assert!(close(out[1], C64::new(0.0, -1.0), 1e-13));
    }

    #[test]
    fn step_matches_quartered_substeps() {
        let h = to_dmatrix(&h11(0.83, -0.37, 0.02, 12.0));
        let s = DVector::from_vec(vec![re(0.6), C64::new(0.1, 0.7), C64::new(-0.2, 0.3)]);
        let once = step_propagate(&h, &s, 0.1).unwrap();
        let mut four = s.clone();
        for _ in 0..4 {
            four = step_propagate(&h, &four, 0.025).unwrap();
        }
        assert!((once - &four).norm() / four.norm() < 1e-12);
    }

    #[test]
    fn unitary_without_decay() {
        let h = to_dmatrix(&h_full(0.77, 1.1, 0.0, 14.0));
        let s = DVector::from_fn(9, |i, _| C64::new(i as f64, 1.0 - i as f64));
        let s = &s / re(s.norm());
        let out = step_propagate(&h, &s, 0.3).unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_finite_input_is_rejected() {
        let mut h = DMatrix::<C64>::zeros(2, 2);
        h[(0, 1)] = C64::new(f64::NAN, 0.0);
        let s = DVector::from_vec(vec![ONE, ZERO]);
        assert!(matches!(
            step_propagate(&h, &s, 0.1),
            Err(Error::NumericInput(_))
        ));
    }

    #[test]
    fn rydberg_population_values() {
        assert_eq!(rydberg_population(&Sector01State::initial()), 0.0);
        assert_eq!(rydberg_population(&Sector11State([ZERO, ZERO, ONE])), 2.0);
        assert_eq!(rydberg_population(&Sector11State([ZERO, ONE, ZERO])), 1.0);
        // |b> expanded in the product basis
        let s = FRAC_1_SQRT_2;
        let mut full = FullTwoAtomState([ZERO; 9]);
        full.0[5] = re(s);
        full.0[7] = re(s);
        assert!((rydberg_population(&full) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_pulse_is_identity() {
        let pulse = Pulse::constant(20, 0.1, 0.0, 0.0).unwrap();
        let rec = propagate(
            &pulse,
            &GateConfig::strontium_n61().without_decay(),
            Offsets::default(),
            true,
            true,
        )
        .unwrap();
        assert_eq!(rec.psi01, Sector01State::initial());
        assert_eq!(rec.psi11, Sector11State::initial());
        assert_eq!(rec.t_r01, 0.0);
        assert_eq!(rec.t_r11, 0.0);
        assert_eq!(rec.phi01, 0.0);
        assert_eq!(rec.phi11, 0.0);
        assert_eq!(rec.history.as_ref().unwrap().len(), 21);
        assert_eq!(rec.history_csv().unwrap().lines().count(), 22);
    }
}
