//! Hydrogenic bound states with the reduced-mass Bohr radius, the dipole
//! smearing vector `F_ab(r) = r Ψ_a*(r) Ψ_b(r)`, its moments and its Fourier
//! transform.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::{integrate_1d_with, AdaptiveOptions, Interval, SphereRule, Tolerance};
use crate::special::{factorial, laguerre, spherical_bessel_j, spherical_harmonic};
use crate::units::AtomParameters;

/// Highest principal quantum number the radial windows are validated for.
pub const MAX_N: u32 = 6;
/// Radial integration window in units of `n² a0`.
pub const RADIAL_WINDOW: f64 = 40.0;
/// Largest magnitude allowed for the first angular term beyond the truncation.
pub const TRUNCATION_TOLERANCE: f64 = 1e-13;

const SPECTROSCOPIC: [char; 6] = ['s', 'p', 'd', 'f', 'g', 'h'];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuantumNumbers {
    pub n: u32,
    pub l: u32,
    pub m: i32,
}

impl QuantumNumbers {
    pub fn new(n: u32, l: u32, m: i32) -> Result<Self> {
        if n == 0 || l >= n || m.unsigned_abs() > l {
            return Err(Error::InvalidQuantumNumbers { n, l, m });
        }
        if n > MAX_N {
            return Err(Error::domain(format!(
                "n = {n} exceeds the supported maximum {MAX_N}"
            )));
        }
        Ok(QuantumNumbers { n, l, m })
    }

    pub fn validate(&self) -> Result<()> {
        QuantumNumbers::new(self.n, self.l, self.m).map(|_| ())
    }

    pub const fn ground() -> Self {
        QuantumNumbers { n: 1, l: 0, m: 0 }
    }

    pub const fn two_pz() -> Self {
        QuantumNumbers { n: 2, l: 1, m: 0 }
    }

    /// Labels accepted by [`FromStr`].
    pub fn supported_labels() -> &'static str {
        "<n><s|p|d|f|g|h>[z|0|+m|-m], e.g. 1s, 2s, 2pz, 2p+1, 2p-1, 3d-2"
    }
}

impl fmt::Display for QuantumNumbers {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = SPECTROSCOPIC[self.l as usize];
        match (self.l, self.m) {
            (0, _) => write!(f, "{}{}", self.n, letter),
            (_, 0) => write!(f, "{}{}z", self.n, letter),
            (_, m) => write!(f, "{}{}{:+}", self.n, letter, m),
        }
    }
}

impl FromStr for QuantumNumbers {
    type Err = Error;

    fn from_str(label: &str) -> Result<Self> {
        let bad = || {
            Error::domain(format!(
                "unknown state label '{label}'; supported: {}",
                QuantumNumbers::supported_labels()
            ))
        };
        let s = label.trim().to_ascii_lowercase();
        let digits: String = s.chars().take_while(|c| c.is_ascii_digit()).collect();
        let n: u32 = digits.parse().map_err(|_| bad())?;
        let mut rest = s[digits.len()..].chars();
        let letter = rest.next().ok_or_else(bad)?;
        let l = SPECTROSCOPIC
            .iter()
            .position(|&c| c == letter)
            .ok_or_else(bad)? as u32;
        let tail: String = rest.collect();
        let m = match tail.as_str() {
            "" if l == 0 => 0,
            "z" | "0" => 0,
            t if t.starts_with('+') || t.starts_with('-') => t.parse::<i32>().map_err(|_| bad())?,
            _ => return Err(bad()),
        };
        QuantumNumbers::new(n, l, m)
    }
}

/// Radial function `R_nl(r)` for Bohr radius `a0`, normalised so that
/// `∫ R² r² dr = 1`.
pub fn radial(n: u32, l: u32, r: f64, a0: f64) -> f64 {
    let na = n as f64 * a0;
    let rho = 2.0 * r / na;
    let norm =
        ((2.0 / na).powi(3) * factorial(n - l - 1) / (2.0 * n as f64 * factorial(n + l))).sqrt();
    norm * (-0.5 * rho).exp() * rho.powi(l as i32) * laguerre(n - l - 1, (2 * l + 1) as f64, rho)
}

pub fn wavefunction(
    q: QuantumNumbers,
    r: &Vector3<f64>,
    params: &AtomParameters,
) -> Result<Complex64> {
    q.validate()?;
    Ok(spherical_harmonic(q.l, q.m, r) * radial(q.n, q.l, r.norm(), params.a0))
}

fn radial_window(a: QuantumNumbers, b: QuantumNumbers, a0: f64) -> f64 {
    RADIAL_WINDOW * (a.n.max(b.n) as f64).powi(2) * a0
}

fn radial_tolerance(scale: f64) -> Tolerance {
    Tolerance::new(1e-15 * scale, 1e-12)
}

fn radial_options() -> AdaptiveOptions {
    AdaptiveOptions {
        max_subdivisions: 4000,
        initial_segments: 8,
    }
}

/// `∫₀^{rmax} r^{2+p} R_a R_b w(r) dr` with the tail beyond the window checked
/// to be negligible.
fn radial_integral<W: Fn(f64) -> f64>(
    a: QuantumNumbers,
    b: QuantumNumbers,
    power: i32,
    weight: W,
    scale: f64,
    a0: f64,
    context: &str,
) -> Result<f64> {
    let rmax = radial_window(a, b, a0);
    let f =
        |r: f64| r.powi(2 + power) * radial(a.n, a.l, r, a0) * radial(b.n, b.l, r, a0) * weight(r);
    // the integrand falls off as exp(-r (1/n_a + 1/n_b)/a0); one Bohr
    // radius past the window it must be far below the requested accuracy
    let tail = (f(rmax).abs() * rmax).max((f(rmax + a0)).abs() * rmax);
    if tail > 1e-20 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::Numerical(format!(
            "{context}: radial tail {tail:e} at r = {rmax:e} is not negligible"
        )));
    }
    let tol = radial_tolerance(scale);
    integrate_1d_with(f, Interval::finite(0.0, rmax), tol, &radial_options()).require(context, tol)
}

/// `⟨q| |r|^k |q⟩`.
pub fn radial_moment(q: QuantumNumbers, k: u32, params: &AtomParameters) -> Result<f64> {
    q.validate()?;
    if k > 6 {
        return Err(Error::domain(format!(
            "radial moments are supported up to k = 6, got {k}"
        )));
    }
    // n^k a0^k sets the magnitude of the moment
    let scale = (q.n as f64 * params.a0).powi(k as i32) * factorial(k + 2);
    radial_integral(q, q, k as i32, |_| 1.0, scale, params.a0, "radial moment")
}

/// Angular integrals `∫ dΩ conj(Y_a) n_i Y_b`.
fn dipole_angular(a: QuantumNumbers, b: QuantumNumbers) -> Result<Vector3<Complex64>> {
    let order = (a.l + b.l + 2).max(SphereRule::MIN_ORDER as u32) as usize;
    let rule = SphereRule::new(order)?;
    let mut acc = Vector3::zeros();
    for (n, w) in rule.points() {
        let p = spherical_harmonic(a.l, a.m, n).conj() * spherical_harmonic(b.l, b.m, n) * *w;
        acc += n.map(|c| p * c);
    }
    Ok(acc)
}

/// `⟨a| r |b⟩ = ∫ d³r F_ab(r)`.
pub fn dipole_matrix_element(
    a: QuantumNumbers,
    b: QuantumNumbers,
    params: &AtomParameters,
) -> Result<Vector3<Complex64>> {
    a.validate()?;
    b.validate()?;
    let angular = dipole_angular(a, b)?;
    if angular.iter().all(|c| c.norm() < TRUNCATION_TOLERANCE) {
        return Ok(Vector3::zeros());
    }
    let scale = (a.n.max(b.n) as f64).powi(2) * params.a0;
    let rad = radial_integral(a, b, 1, |_| 1.0, scale, params.a0, "dipole matrix element")?;
    Ok(angular.map(|c| clean(c) * rad))
}

fn clean(c: Complex64) -> Complex64 {
    let re = if c.re.abs() < 1e-15 { 0.0 } else { c.re };
    let im = if c.im.abs() < 1e-15 { 0.0 } else { c.im };
    Complex64::new(re, im)
}

/// The smearing vector `F_ab(r) = r Ψ_a*(r) Ψ_b(r)`.
#[derive(Debug, Clone, Copy)]
pub struct SmearingVector {
    pub a: QuantumNumbers,
    pub b: QuantumNumbers,
    pub a0: f64,
}

impl SmearingVector {
    pub fn new(a: QuantumNumbers, b: QuantumNumbers, params: &AtomParameters) -> Result<Self> {
        a.validate()?;
        b.validate()?;
        Ok(SmearingVector {
            a,
            b,
            a0: params.a0,
        })
    }

    pub fn evaluate(&self, r: &Vector3<f64>) -> Vector3<Complex64> {
        let rn = r.norm();
        let pa =
            spherical_harmonic(self.a.l, self.a.m, r) * radial(self.a.n, self.a.l, rn, self.a0);
        let pb =
            spherical_harmonic(self.b.l, self.b.m, r) * radial(self.b.n, self.b.l, rn, self.a0);
        let p = pa.conj() * pb;
        r.map(|c| p * c)
    }
}

#[derive(Debug, Clone)]
struct AngularTerm {
    l: u32,
    m: i32,
    coefficient: Vector3<Complex64>,
}

/// Precomputed spherical-harmonic expansion of `f_ab(k) = ∫ d³r e^{ik·r} F_ab(r)`:
///
/// `f^i(k) = 4π Σ_{lm} i^l Y_lm(e_k) I_l(|k|) c^i_lm`, with
/// `c^i_lm = ∫ dΩ conj(Y_lm) n_i conj(Y_a) Y_b` and
/// `I_l(k) = ∫ r³ R_a R_b j_l(kr) dr`.
///
/// The angular product has degree `l_a + l_b + 1`, so the sum terminates
/// there; the first omitted order is computed and checked to vanish.
#[derive(Debug, Clone)]
pub struct FormFactor {
    a: QuantumNumbers,
    b: QuantumNumbers,
    a0: f64,
    terms: Vec<AngularTerm>,
    scale: f64,
}

impl FormFactor {
    pub fn new(a: QuantumNumbers, b: QuantumNumbers, params: &AtomParameters) -> Result<Self> {
        a.validate()?;
        b.validate()?;
        let lmax = a.l + b.l + 1;
        let order = ((2 * lmax + 3) as usize)
            .div_ceil(2)
            .max(SphereRule::MIN_ORDER);
        let rule = SphereRule::new(order)?;
        let mut terms = Vec::new();
        for l in 0..=lmax + 1 {
            for m in -(l as i32)..=(l as i32) {
                let mut c = Vector3::zeros();
                for (n, w) in rule.points() {
                    let p = spherical_harmonic(l, m, n).conj()
                        * spherical_harmonic(a.l, a.m, n).conj()
                        * spherical_harmonic(b.l, b.m, n)
                        * *w;
                    c += n.map(|x| p * x);
                }
                let size = c.iter().map(|z| z.norm()).fold(0.0, f64::max);
                if l == lmax + 1 {
                    if size > TRUNCATION_TOLERANCE {
                        return Err(Error::Numerical(format!(
                            "form factor {a}->{b}: term l = {l}, m = {m} has weight {size:e} beyond the truncation"
                        )));
                    }
                } else if size > TRUNCATION_TOLERANCE {
                    terms.push(AngularTerm {
                        l,
                        m,
                        coefficient: c.map(clean),
                    });
                }
            }
        }
        let scale = (a.n.max(b.n) as f64).powi(2) * params.a0;
        Ok(FormFactor {
            a,
            b,
            a0: params.a0,
            terms,
            scale,
        })
    }

    /// `I_l(k)`.
    pub fn radial_integral(&self, l: u32, k: f64) -> Result<f64> {
        radial_integral(
            self.a,
            self.b,
            1,
            |r| spherical_bessel_j(l, k * r),
            self.scale,
            self.a0,
            "form factor radial integral",
        )
    }

    /// Highest multipole order present in the expansion.
    pub fn max_order(&self) -> u32 {
        self.a.l + self.b.l + 1
    }

    /// `I_l(|k|)` for every `l` up to [`max_order`](Self::max_order); reusable
    /// for all directions of `k`.
    pub fn radial_integrals(&self, k: f64) -> Result<Vec<f64>> {
        if !(k >= 0.0 && k.is_finite()) {
            return Err(Error::domain("form factor needs a finite wavevector"));
        }
        let mut needed = vec![false; self.max_order() as usize + 1];
        for term in &self.terms {
            needed[term.l as usize] = true;
        }
        needed
            .iter()
            .enumerate()
            .map(|(l, &used)| {
                if !used || (k == 0.0 && l > 0) {
                    Ok(0.0)
                } else {
                    self.radial_integral(l as u32, k)
                }
            })
            .collect()
    }

    /// `f(k)` from precomputed `I_l(|k|)`.
    pub fn evaluate_with(&self, k: &Vector3<f64>, radials: &[f64]) -> Vector3<Complex64> {
        let mut acc = Vector3::<Complex64>::zeros();
        for term in &self.terms {
            let rad = radials[term.l as usize];
            if rad == 0.0 {
                continue;
            }
            let factor = Complex64::i().powu(term.l)
                * spherical_harmonic(term.l, term.m, k)
                * (4.0 * PI * rad);
            acc += term.coefficient.map(|c| c * factor);
        }
        acc
    }

    pub fn evaluate(&self, k: &Vector3<f64>) -> Result<Vector3<Complex64>> {
        if !k.iter().all(|c| c.is_finite()) {
            return Err(Error::domain("form factor needs a finite wavevector"));
        }
        let radials = self.radial_integrals(k.norm())?;
        Ok(self.evaluate_with(k, &radials))
    }
}

pub fn form_factor(
    a: QuantumNumbers,
    b: QuantumNumbers,
    k: &Vector3<f64>,
    params: &AtomParameters,
) -> Result<Vector3<Complex64>> {
    FormFactor::new(a, b, params)?.evaluate(k)
}

/// `|f_{1s,2pz}|² − |f·e_k|²` in closed form:
/// `294912 a0² sin²θ / (4 a0² k² + 9)⁶`.
pub fn transverse_form_factor_1s_2pz(k: &Vector3<f64>, a0: f64) -> f64 {
    let k2 = k.norm_squared();
    let sin2 = if k2 == 0.0 { 1.0 } else { 1.0 - k.z * k.z / k2 };
    294_912.0 * a0 * a0 * sin2 / (4.0 * a0 * a0 * k2 + 9.0).powi(6)
}
