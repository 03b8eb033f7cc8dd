// Copyright 2026 The rydberg-cz Contributors
// SPDX-License-Identifier: Apache-2.0

//! Exact first-order derivatives of decay-free sector propagation.
//!
//! With `Γ = 0` every step Hamiltonian is real symmetric, `H = V Λ Vᵀ`, and
//! `f(H) = exp(-i H dt)` together with its first and second Fréchet
//! derivatives are available in closed form from divided differences of `f`
//! over the eigenvalues. The forward pass stores states and sensitivities at
//! every step boundary; the backward pass runs the discrete adjoint.

use nalgebra::{DMatrix, SMatrix, SVector, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub(crate) type CMat<const D: usize> = SMatrix<C64, D, D>;
pub(crate) type CVec<const D: usize> = SVector<C64, D>;
pub(crate) type RMat<const D: usize> = SMatrix<f64, D, D>;

/// Below this `dt·(λmax - λmin)` the second divided difference switches to
/// a Taylor series around the mean.
const TAYLOR_SPREAD: f64 = 1e-2;
const TAYLOR_ORDER: usize = 9;

fn kappa(dt: f64) -> C64 {
    C64::new(0.0, -dt)
}

fn f0(lam: f64, dt: f64) -> C64 {
    C64::from_polar(1.0, -lam * dt)
}

/// `f[a, b]` for `f(x) = exp(-i x dt)`.
fn f1(a: f64, b: f64, dt: f64) -> C64 {
    let m = 0.5 * (a + b);
    let h = 0.5 * (a - b) * dt;
    let sinc = if h.abs() < 1e-4 {
        1.0 - h * h / 6.0
    } else {
        h.sin() / h
    };
    kappa(dt) * f0(m, dt) * sinc
}

/// Complete homogeneous symmetric polynomial of degree `j` in three variables.
fn complete_h(y: [f64; 3], j: usize) -> f64 {
    let mut s = 0.0;
    for p in 0..=j {
        for q in 0..=(j - p) {
            let r = j - p - q;
            s += y[0].powi(p as i32) * y[1].powi(q as i32) * y[2].powi(r as i32);
        }
    }
    s
}

/// `f[a, b, c]` for `f(x) = exp(-i x dt)`.
fn f2(a: f64, b: f64, c: f64, dt: f64) -> C64 {
    let mut x = [a, b, c];
    x.sort_by(|p, q| q.total_cmp(p));
    let [hi, mid, lo] = x;
    if (hi - lo) * dt < TAYLOR_SPREAD {
        let m = (hi + mid + lo) / 3.0;
        let y = [hi - m, mid - m, lo - m];
        let k = kappa(dt);
        let mut kn = k * k;
        let mut fact = 2.0;
        let mut s = C64::new(0.0, 0.0);
        for n in 2..TAYLOR_ORDER {
            s += kn / fact * complete_h(y, n - 2);
            kn *= k;
            fact *= (n + 1) as f64;
        }
        f0(m, dt) * s
    } else {
        (f1(hi, mid, dt) - f1(mid, lo, dt)) / (hi - lo)
    }
}

/// Propagator, first derivatives along `E_Ω`, `E_Δ`, and the mixed second
/// derivatives `(ΩΩ, ΩΔ, ΔΔ)` for one step.
pub(crate) struct StepDerivs<const D: usize> {
    pub u: CMat<D>,
    pub l: [CMat<D>; 2],
    pub l2: [CMat<D>; 3],
}

fn to_complex<const D: usize>(m: &RMat<D>) -> CMat<D> {
    m.map(|x| C64::new(x, 0.0))
}

pub(crate) fn step_derivs<const D: usize>(h: RMat<D>, e: &[RMat<D>; 2], dt: f64) -> StepDerivs<D> {
    let eig = SymmetricEigen::new(DMatrix::from_iterator(D, D, h.iter().cloned()));
    let v = RMat::<D>::from_fn(|i, j| eig.eigenvectors[(i, j)]);
    let lam = eig.eigenvalues;
    let vt = v.transpose();
    let et = [vt * e[0] * v, vt * e[1] * v];
    let vc = to_complex(&v);
    let vct = vc.transpose();

    let mut d0 = CMat::<D>::zeros();
    let mut first = CMat::<D>::zeros();
    let mut second = vec![C64::new(0.0, 0.0); D * D * D];
    for i in 0..D {
        d0[(i, i)] = f0(lam[i], dt);
        for j in 0..D {
            first[(i, j)] = f1(lam[i], lam[j], dt);
            for m in 0..D {
                second[(i * D + m) * D + j] = f2(lam[i], lam[m], lam[j], dt);
            }
        }
    }
    let u = vc * d0 * vct;
    let l = [0, 1].map(|p| {
        let inner = CMat::<D>::from_fn(|i, j| first[(i, j)] * et[p][(i, j)]);
        vc * inner * vct
    });
    let l2 = [(0, 0), (0, 1), (1, 1)].map(|(p, q)| {
        let inner = CMat::<D>::from_fn(|i, j| {
            let mut s = C64::new(0.0, 0.0);
            for m in 0..D {
                let w = et[p][(i, m)] * et[q][(m, j)] + et[q][(i, m)] * et[p][(m, j)];
                s += second[(i * D + m) * D + j] * w;
            }
            s
        });
        vc * inner * vct
    });
    StepDerivs { u, l, l2 }
}

/// Stored forward pass of one sector: boundary states `k = 0..=N`.
pub(crate) struct SectorTrace<const D: usize> {
    pub steps: Vec<StepDerivs<D>>,
    pub psi: Vec<CVec<D>>,
    pub s: [Vec<CVec<D>>; 2],
    pub counts: [f64; D],
    pub t_r: f64,
}

impl<const D: usize> SectorTrace<D> {
    pub fn final_psi(&self) -> CVec<D> {
        *self.psi.last().expect("trace holds the initial state")
    }

    pub fn final_s(&self, p: usize) -> CVec<D> {
        *self.s[p].last().expect("trace holds the initial state")
    }
}

fn rydberg_count<const D: usize>(psi: &CVec<D>, counts: &[f64; D]) -> f64 {
    psi.iter().zip(counts).map(|(a, n)| n * a.norm_sqr()).sum()
}

/// Runs one sector forward from its computational state.
pub(crate) fn forward<const D: usize>(
    omega: &[f64],
    delta: &[f64],
    dt: f64,
    hamiltonian: impl Fn(f64, f64) -> RMat<D>,
    e: &[RMat<D>; 2],
    counts: [f64; D],
) -> Result<SectorTrace<D>> {
    let n = omega.len();
    let mut psi = CVec::<D>::zeros();
    psi[0] = C64::new(1.0, 0.0);
    let mut s = [CVec::<D>::zeros(); 2];
    let mut trace = SectorTrace {
        steps: Vec::with_capacity(n),
        psi: Vec::with_capacity(n + 1),
        s: [Vec::with_capacity(n + 1), Vec::with_capacity(n + 1)],
        counts,
        t_r: 0.0,
    };
    trace.psi.push(psi);
    trace.s[0].push(s[0]);
    trace.s[1].push(s[1]);
    let mut n_prev = 0.0;
    for (k, (&w, &d)) in omega.iter().zip(delta).enumerate() {
        if !(w.is_finite() && d.is_finite()) {
            return Err(Error::Numeric(format!("non-finite control at step {k}")));
        }
        let st = step_derivs(hamiltonian(w, d), e, dt);
        let next_s = [st.u * s[0] + st.l[0] * psi, st.u * s[1] + st.l[1] * psi];
        psi = st.u * psi;
        s = next_s;
        let n_next = rydberg_count(&psi, &counts);
        trace.t_r += 0.5 * dt * (n_prev + n_next);
        n_prev = n_next;
        trace.psi.push(psi);
        trace.s[0].push(s[0]);
        trace.s[1].push(s[1]);
        trace.steps.push(st);
    }
    Ok(trace)
}

/// Gradient seeds `∂L/∂Re z + i ∂L/∂Im z` for the final `(Ψ, s_Ω, s_Δ)`,
/// plus the scalar weight `∂L/∂T_r` of the integrated Rydberg time.
pub(crate) struct Seeds<const D: usize> {
    pub psi: CVec<D>,
    pub s: [CVec<D>; 2],
    pub t_r: f64,
}

fn re_dot<const D: usize>(g: &CVec<D>, v: &CVec<D>) -> f64 {
    g.iter().zip(v.iter()).map(|(a, b)| (a.conj() * b).re).sum()
}

/// Accumulates `∂L/∂Ω_k` and `∂L/∂Δ_k` into `grad_w` and `grad_d`.
pub(crate) fn backward<const D: usize>(
    trace: &SectorTrace<D>,
    seeds: &Seeds<D>,
    dt: f64,
    grad_w: &mut [f64],
    grad_d: &mut [f64],
) {
    let n = trace.steps.len();
    let running = |k: usize| -> CVec<D> {
        let w = if k == n { 0.5 * dt } else { dt };
        let psi = &trace.psi[k];
        CVec::<D>::from_fn(|i, _| psi[i] * (2.0 * trace.counts[i] * w * seeds.t_r))
    };
    let mut lp = seeds.psi + running(n);
    let mut ls = seeds.s;
    for k in (0..n).rev() {
        let st = &trace.steps[k];
        let psi = &trace.psi[k];
        let s = [&trace.s[0][k], &trace.s[1][k]];
        // second-derivative index for (sensitivity p, parameter q)
        let idx = |p: usize, q: usize| if p == q { 2 * p } else { 1 };
        for q in 0..2 {
            let mut g = re_dot(&lp, &(st.l[q] * psi));
            for p in 0..2 {
                g += re_dot(&ls[p], &(st.l[q] * s[p] + st.l2[idx(p, q)] * psi));
            }
            if q == 0 {
                grad_w[k] += g;
            } else {
                grad_d[k] += g;
            }
        }
        let uh = st.u.adjoint();
        let new_lp = uh * lp + st.l[0].adjoint() * ls[0] + st.l[1].adjoint() * ls[1];
        ls = [uh * ls[0], uh * ls[1]];
        lp = new_lp;
        if k > 0 {
            lp += running(k);
        }
    }
}
