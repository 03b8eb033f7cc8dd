// Copyright 2026 The rydberg-cz Contributors
// SPDX-License-Identifier: Apache-2.0

//! Limited-memory BFGS with a strong-Wolfe line search.

use std::collections::VecDeque;

use crate::error::{Error, Result};

const MEMORY: usize = 10;
const C1: f64 = 1e-4;
const C2: f64 = 0.9;
const MAX_BRACKET: usize = 40;
const MAX_ZOOM: usize = 40;

pub(crate) struct Outcome {
    pub x: Vec<f64>,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(x: &[f64], alpha: f64, d: &[f64]) -> Vec<f64> {
    x.iter().zip(d).map(|(a, b)| a + alpha * b).collect()
}

struct Point {
    alpha: f64,
    f: f64,
    g: Vec<f64>,
    slope: f64,
}

/// Objective wrapper that maps non-finite values to `+∞` so the line search
/// backs off instead of failing.
fn probe<F>(fun: &mut F, x: &[f64], d: &[f64], alpha: f64) -> Result<Point>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let (f, g) = fun(&axpy(x, alpha, d))?;
    if f.is_finite() && g.iter().all(|v| v.is_finite()) {
        let slope = dot(&g, d);
        Ok(Point { alpha, f, g, slope })
    } else {
        Ok(Point {
            alpha,
            f: f64::INFINITY,
            g,
            slope: f64::NAN,
        })
    }
}

fn interpolate(lo: &Point, hi: &Point) -> f64 {
    // cubic through both endpoints, bisection when it lands near an edge
    let (a, b) = (lo.alpha, hi.alpha);
    let width = (b - a).abs();
    if hi.f.is_finite() && hi.slope.is_finite() {
        let d1 = lo.slope + hi.slope - 3.0 * (lo.f - hi.f) / (a - b);
        let disc = d1 * d1 - lo.slope * hi.slope;
        if disc >= 0.0 {
            let d2 = (b - a).signum() * disc.sqrt();
            let t = b - (b - a) * (hi.slope + d2 - d1) / (hi.slope - lo.slope + 2.0 * d2);
            let (l, h) = (a.min(b), a.max(b));
            if t.is_finite() && t > l + 0.1 * width && t < h - 0.1 * width {
                return t;
            }
        }
    }
    0.5 * (a + b)
}

fn zoom<F>(
    fun: &mut F,
    x: &[f64],
    d: &[f64],
    f0: f64,
    slope0: f64,
    mut lo: Point,
    mut hi: Point,
) -> Result<Option<Point>>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    for _ in 0..MAX_ZOOM {
        let alpha = interpolate(&lo, &hi);
        if (hi.alpha - lo.alpha).abs() < 1e-16 * lo.alpha.abs().max(1.0) {
            break;
        }
        let p = probe(fun, x, d, alpha)?;
        if p.f > f0 + C1 * alpha * slope0 || p.f >= lo.f {
            hi = p;
        } else {
            if p.slope.abs() <= -C2 * slope0 {
                return Ok(Some(p));
            }
            if p.slope * (hi.alpha - lo.alpha) >= 0.0 {
                hi = lo;
            }
            lo = p;
        }
    }
    // accept the best sufficient-decrease point if the bracket collapsed
    Ok((lo.alpha > 0.0 && lo.f < f0).then_some(lo))
}

fn line_search<F>(
    fun: &mut F,
    x: &[f64],
    d: &[f64],
    f0: f64,
    g0: &[f64],
    alpha0: f64,
) -> Result<Option<Point>>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let slope0 = dot(g0, d);
    let start = Point {
        alpha: 0.0,
        f: f0,
        g: g0.to_vec(),
        slope: slope0,
    };
    let mut prev = start;
    let mut alpha = alpha0;
    for i in 0..MAX_BRACKET {
        let p = probe(fun, x, d, alpha)?;
        if p.f > f0 + C1 * alpha * slope0 || (i > 0 && p.f >= prev.f) {
            return zoom(fun, x, d, f0, slope0, prev, p);
        }
        if p.slope.abs() <= -C2 * slope0 {
            return Ok(Some(p));
        }
        if p.slope >= 0.0 {
            return zoom(fun, x, d, f0, slope0, p, prev);
        }
        prev = p;
        alpha *= 2.0;
    }
    Ok(Some(prev).filter(|p| p.alpha > 0.0))
}

/// Minimizes `fun` from `x0`. Stops when `‖∇f‖ < gtol`, after `max_iter`
/// iterations, or when no step along the search direction decreases `f`.
pub(crate) fn minimize<F>(mut fun: F, x0: Vec<f64>, max_iter: usize, gtol: f64) -> Result<Outcome>
where
    F: FnMut(&[f64]) -> Result<(f64, Vec<f64>)>,
{
    let mut x = x0;
    let (mut f, mut g) = fun(&x)?;
    if !f.is_finite() || g.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric(
            "objective is not finite at the starting point".into(),
        ));
    }
    let mut history: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(MEMORY);
    let mut iterations = 0;
    while iterations < max_iter && norm(&g) >= gtol {
        // two-loop recursion
        let mut q = g.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, rho) in history.iter().rev() {
            let a = rho * dot(s, &q);
            q.iter_mut().zip(y).for_each(|(qi, yi)| *qi -= a * yi);
            alphas.push(a);
        }
        let gamma = history
            .back()
            .map_or(1.0 / norm(&g).max(1.0), |(s, y, _)| dot(s, y) / dot(y, y));
        q.iter_mut().for_each(|v| *v *= gamma);
        for ((s, y, rho), a) in history.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(y, &q);
            q.iter_mut().zip(s).for_each(|(qi, si)| *qi += (a - b) * si);
        }
        let mut d: Vec<f64> = q.iter().map(|v| -v).collect();
        if dot(&d, &g) >= 0.0 {
            history.clear();
            d = g.iter().map(|v| -v / norm(&g).max(1.0)).collect();
        }
        iterations += 1;
        let Some(p) = line_search(&mut fun, &x, &d, f, &g, 1.0)? else {
            if history.is_empty() {
                break;
            }
            history.clear();
            continue;
        };
        let x_new = axpy(&x, p.alpha, &d);
        let s: Vec<f64> = x_new.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = p.g.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if history.len() == MEMORY {
                history.pop_front();
            }
            history.push_back((s, y, 1.0 / sy));
        }
        x = x_new;
        f = p.f;
        g = p.g;
    }
    Ok(Outcome { x, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let fun = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
            let (a, b) = (x[0], x[1]);
            let f = (1.0 - a).powi(2) + 100.0 * (b - a * a).powi(2);
            let g = vec![
                -2.0 * (1.0 - a) - 400.0 * a * (b - a * a),
                200.0 * (b - a * a),
            ];
            Ok((f, g))
        };
        let out = minimize(fun, vec![-1.2, 1.0], 500, 1e-10).unwrap();
        assert!(
            (out.x[0] - 1.0).abs() < 1e-8 && (out.x[1] - 1.0).abs() < 1e-8,
            "{:?}",
            out.x
        );
    }

    #[test]
    fn quadratic_in_few_steps() {
        let fun = |x: &[f64]| -> Result<(f64, Vec<f64>)> {
            let f = x
                .iter()
                .enumerate()
                .map(|(i, v)| (i + 1) as f64 * v * v)
                .sum();
            let g = x
                .iter()
                .enumerate()
                .map(|(i, v)| 2.0 * (i + 1) as f64 * v)
                .collect();
            Ok((f, g))
        };
        let out = minimize(fun, vec![1.0; 5], 100, 1e-12).unwrap();
        assert!(out.x.iter().all(|v| v.abs() < 1e-10));
        assert!(out.iterations < 30);
    }
}
