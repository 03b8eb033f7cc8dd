// Copyright 2026 The rydberg-cz Contributors
// SPDX-License-Identifier: Apache-2.0

//! Wigner 3j and 6j symbols from the Racah single-sum formulas.
//!
//! Sums are accumulated as exact rationals; only the final square root is
//! taken in floating point.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Twice an angular momentum (so `1/2` is stored as `1`).
pub(crate) type Twice = i64;

/// Converts an angular momentum to its doubled integer form.
pub(crate) fn twice(j: f64) -> Result<Twice> {
    let t = 2.0 * j;
    if !t.is_finite() || (t - t.round()).abs() > 1e-9 {
        return Err(Error::Domain(format!("{j} is not a half-integer")));
    }
    Ok(t.round() as Twice)
}

fn factorial(n: i64) -> BigInt {
    (2..=n).fold(BigInt::one(), |acc, k| acc * k)
}

fn ratio(num: BigInt, den: BigInt) -> BigRational {
    BigRational::new(num, den)
}

/// `(a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)!` for doubled arguments, or `None`
/// if the triad is not triangular.
fn triangle_sq(a: Twice, b: Twice, c: Twice) -> Option<BigRational> {
    let (x, y, z) = (a + b - c, a - b + c, -a + b + c);
    if x < 0 || y < 0 || z < 0 || x % 2 != 0 || y % 2 != 0 || z % 2 != 0 {
        return None;
    }
    Some(ratio(
        factorial(x / 2) * factorial(y / 2) * factorial(z / 2),
        factorial((a + b + c) / 2 + 1),
    ))
}

/// `sign(s) * sqrt(s^2 * d)` in floating point.
fn signed_root(s: BigRational, d: BigRational) -> f64 {
    if s.is_zero() {
        return 0.0;
    }
    let mag = (&s * &s * d).to_f64().unwrap_or(f64::NAN).sqrt();
    if s.is_negative() {
        -mag
    } else {
        mag
    }
}

pub(crate) fn sixj_twice(j: [Twice; 6]) -> f64 {
    if j.iter().any(|&x| x < 0) {
        return 0.0;
    }
    let [j1, j2, j3, j4, j5, j6] = j;
    let triads = [(j1, j2, j3), (j1, j5, j6), (j4, j2, j6), (j4, j5, j3)];
    let mut pref = BigRational::one();
    for (a, b, c) in triads {
        match triangle_sq(a, b, c) {
            Some(t) => pref *= t,
            None => return 0.0,
        }
    }
    let a = triads.map(|(x, y, z)| (x + y + z) / 2);
    let b = [
        (j1 + j2 + j4 + j5) / 2,
        (j2 + j3 + j5 + j6) / 2,
        (j3 + j1 + j6 + j4) / 2,
    ];
    let t_min = *a.iter().max().unwrap();
    let t_max = *b.iter().min().unwrap();
    let mut sum = BigRational::zero();
    for t in t_min..=t_max {
        let den = a.iter().map(|&x| factorial(t - x)).product::<BigInt>()
            * b.iter().map(|&x| factorial(x - t)).product::<BigInt>();
        let term = ratio(factorial(t + 1), den);
        if t % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    signed_root(sum, pref)
}

pub(crate) fn threej_twice(j: [Twice; 3], m: [Twice; 3]) -> f64 {
    let [j1, j2, j3] = j;
    let [m1, m2, m3] = m;
    if m1 + m2 + m3 != 0 {
        return 0.0;
    }
    for (jj, mm) in j.iter().zip(&m) {
        if mm.abs() > *jj || (jj - mm) % 2 != 0 {
            return 0.0;
        }
    }
    let Some(tri) = triangle_sq(j1, j2, j3) else {
        return 0.0;
    };
    let pref = tri
        * ratio(
            [j1 + m1, j1 - m1, j2 + m2, j2 - m2, j3 + m3, j3 - m3]
                .iter()
                .map(|&x| factorial(x / 2))
                .product(),
            BigInt::one(),
        );
    let k_min = 0.max((j2 - j3 - m1) / 2).max((j1 - j3 + m2) / 2);
    let k_max = ((j1 + j2 - j3) / 2).min((j1 - m1) / 2).min((j2 + m2) / 2);
    let mut sum = BigRational::zero();
    for k in k_min..=k_max {
        let den = factorial(k)
            * factorial((j1 + j2 - j3) / 2 - k)
            * factorial((j1 - m1) / 2 - k)
            * factorial((j2 + m2) / 2 - k)
            * factorial((j3 - j2 + m1) / 2 + k)
            * factorial((j3 - j1 - m2) / 2 + k);
        let term = ratio(BigInt::one(), den);
        if k % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    let phase = (j1 - j2 - m3) / 2;
    let v = signed_root(sum, pref);
    if phase.rem_euclid(2) == 1 {
        -v
    } else {
        v
    }
}

/// Wigner 6j symbol `{j1 j2 j3; j4 j5 j6}`. Zero when a triangle condition
/// fails; [`Error::Domain`] for arguments that are not nonnegative
/// half-integers.
pub fn wigner6j(j1: f64, j2: f64, j3: f64, j4: f64, j5: f64, j6: f64) -> Result<f64> {
    let mut t = [0; 6];
    for (slot, j) in t.iter_mut().zip([j1, j2, j3, j4, j5, j6]) {
        *slot = twice(j)?;
        if *slot < 0 {
            return Err(Error::Domain(format!("negative angular momentum {j}")));
        }
    }
    Ok(sixj_twice(t))
}

/// Wigner 3j symbol `(j1 j2 j3; m1 m2 m3)`.
pub fn wigner3j(j1: f64, j2: f64, j3: f64, m1: f64, m2: f64, m3: f64) -> Result<f64> {
    let mut j = [0; 3];
    for (slot, v) in j.iter_mut().zip([j1, j2, j3]) {
        *slot = twice(v)?;
        if *slot < 0 {
            return Err(Error::Domain(format!("negative angular momentum {v}")));
        }
    }
    let m = [twice(m1)?, twice(m2)?, twice(m3)?];
    Ok(threej_twice(j, m))
}
