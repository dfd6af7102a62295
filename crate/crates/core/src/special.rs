//! Special functions: generalized Laguerre polynomials, associated Legendre
//! functions, complex spherical harmonics and spherical Bessel functions.
//!
//! Spherical harmonics follow the Condon–Shortley phase convention:
//! `Y_{l,-m} = (-1)^m conj(Y_{l,m})` and `Y_{1,1} ∝ -(x + iy)`.

use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;

pub fn factorial(n: u32) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Generalized Laguerre polynomial `L_n^{(alpha)}(x)` by three-term recurrence.
pub fn laguerre(n: u32, alpha: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let mut l0 = 1.0;
    let mut l1 = 1.0 + alpha - x;
    for k in 1..n {
        let k = k as f64;
        let l2 = ((2.0 * k + 1.0 + alpha - x) * l1 - (k + alpha) * l0) / (k + 1.0);
        l0 = l1;
        l1 = l2;
    }
    l1
}

/// Associated Legendre function `P_l^m(x)` for `0 <= m <= l`, including the
/// Condon–Shortley factor `(-1)^m`.
pub fn assoc_legendre(l: u32, m: u32, x: f64) -> f64 {
    assert!(m <= l, "assoc_legendre needs m <= l");
    let s = (1.0 - x * x).max(0.0).sqrt();
    // P_m^m = (-1)^m (2m-1)!! s^m
    let mut pmm = 1.0;
    for k in 0..m {
        pmm *= -((2 * k + 1) as f64) * s;
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = x * (2 * m + 1) as f64 * pmm;
    if l == m + 1 {
        return pm1;
    }
    let mut pm0 = pmm;
    for ll in (m + 2)..=l {
        let p = ((2 * ll - 1) as f64 * x * pm1 - (ll + m - 1) as f64 * pm0) / (ll - m) as f64;
        pm0 = pm1;
        pm1 = p;
    }
    pm1
}

/// Complex spherical harmonic `Y_lm` evaluated on the direction of `n`.
/// The zero vector is treated as the north pole.
pub fn spherical_harmonic(l: u32, m: i32, n: &Vector3<f64>) -> Complex64 {
    assert!(m.unsigned_abs() <= l, "spherical_harmonic needs |m| <= l");
    let r = n.norm();
    let (cos_t, phi) = if r == 0.0 {
        (1.0, 0.0)
    } else {
        ((n.z / r).clamp(-1.0, 1.0), n.y.atan2(n.x))
    };
    let am = m.unsigned_abs();
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * factorial(l - am) / factorial(l + am)).sqrt();
    let y = Complex64::from_polar(norm * assoc_legendre(l, am, cos_t), am as f64 * phi);
    if m < 0 {
        let sign = if am.is_multiple_of(2) { 1.0 } else { -1.0 };
        y.conj() * sign
    } else {
        y
    }
}

/// Spherical Bessel function of the first kind `j_l(x)` for `x >= 0`.
pub fn spherical_bessel_j(l: u32, x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        return if l == 0 { 1.0 } else { 0.0 };
    }
    if x <= (l as f64).max(1.0) {
        // ascending series; for x <= l the terms shrink from the start
        let mut dfact = 1.0;
        for k in 0..=l {
            dfact *= (2 * k + 1) as f64;
        }
        let lead = x.powi(l as i32) / dfact;
        let q = -0.5 * x * x;
        let mut term = 1.0;
        let mut sum = 1.0;
        for k in 1..200 {
            term *= q / (k as f64 * (2 * l + 2 * k + 1) as f64);
            sum += term;
            if term.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        return lead * sum;
    }
    // upward recurrence is stable for x > l
    let (s, c) = x.sin_cos();
    let j0 = s / x;
    if l == 0 {
        return j0;
    }
    let mut jm = j0;
    let mut jl = s / (x * x) - c / x;
    for k in 1..l {
        let jp = (2 * k + 1) as f64 / x * jl - jm;
        jm = jl;
        jl = jp;
    }
    jl
}
