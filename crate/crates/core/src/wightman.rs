//! Vacuum two-point tensors of the electric and magnetic fields.
//!
//! With `ħ = c = ε₀ = 1`, `s = t' − t`, `r̃ = |x − x'|` and the unit
//! separation `n = (x − x')/r̃`, the off-cone closed forms are
//!
//! ```text
//! W_E^{ij}  = (1/π²) [r̃² (2 n^i n^j − δ^{ij}) − s² δ^{ij}] / (r̃² − s²)³
//! W_BE^{ij} = −(1/8π²) β ε^{ijk} n_k,    β = 16 s r̃ / (r̃² − s²)³
//! ```
//!
//! with `W_B = W_E` and `W_EB^{ij} = W_BE^{ji}`. The light-cone
//! distributions (δ, δ′, δ″ in `r̃ ± s`) are never evaluated.
//!
//! The momentum form inserts the regulator `t − t' → t − t' − iε`, performs
//! the radial integral analytically and reduces the angular integral with
//! spherical Bessel functions; `ε → 0` is taken by Richardson extrapolation.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::empol::{epsilon_contract, BoostParameters, FieldBoost};
use crate::error::{Error, Result};
use crate::quad::richardson;

/// Relative distance from the light cone below which closed forms are refused.
pub const LIGHTCONE_MARGIN: f64 = 1e-9;
/// Default regulator relative to the smallest scale of the point pair.
pub const DEFAULT_EPSILON_FACTOR: f64 = 1e-3;
/// Number of halvings of ε used for the extrapolation.
pub const RICHARDSON_STEPS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pairing {
    EE,
    BB,
    BE,
    EB,
}

impl Pairing {
    pub const ALL: [Pairing; 4] = [Pairing::EE, Pairing::BB, Pairing::BE, Pairing::EB];

    /// The pairing with the two fields in the opposite order.
    pub fn swapped(self) -> Pairing {
        match self {
            Pairing::BE => Pairing::EB,
            Pairing::EB => Pairing::BE,
            p => p,
        }
    }
}

impl fmt::Display for Pairing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Pairing::EE => "EE",
            Pairing::BB => "BB",
            Pairing::BE => "BE",
            Pairing::EB => "EB",
        };
        f.write_str(s)
    }
}

impl FromStr for Pairing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "EE" => Ok(Pairing::EE),
            "BB" => Ok(Pairing::BB),
            "BE" => Ok(Pairing::BE),
            "EB" => Ok(Pairing::EB),
            _ => Err(Error::domain(format!(
                "unknown pairing '{s}'; expected EE, BB, BE or EB"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacetimePointPair {
    pub t: f64,
    pub t_prime: f64,
    pub x: Vector3<f64>,
    pub x_prime: Vector3<f64>,
}

impl SpacetimePointPair {
    pub fn new(t: f64, x: Vector3<f64>, t_prime: f64, x_prime: Vector3<f64>) -> Self {
        SpacetimePointPair {
            t,
            t_prime,
            x,
            x_prime,
        }
    }

    /// `r̃ = |x − x'|`.
    pub fn separation(&self) -> f64 {
        (self.x - self.x_prime).norm()
    }

    /// `Δt = t − t'`.
    pub fn dt(&self) -> f64 {
        self.t - self.t_prime
    }

    /// The pair with the two points exchanged.
    pub fn swapped(&self) -> Self {
        SpacetimePointPair::new(self.t_prime, self.x_prime, self.t, self.x)
    }

    pub fn shifted(&self, dt: f64, dx: &Vector3<f64>) -> Self {
        SpacetimePointPair::new(
            self.t + dt,
            self.x + dx,
            self.t_prime + dt,
            self.x_prime + dx,
        )
    }

    /// `|r̃² − Δt²|` relative to `r̃² + Δt²`.
    pub fn lightcone_distance(&self) -> f64 {
        let r2 = (self.x - self.x_prime).norm_squared();
        let s2 = self.dt() * self.dt();
        (r2 - s2).abs() / (r2 + s2)
    }

    pub fn off_lightcone(&self, margin: f64) -> bool {
        self.lightcone_distance() > margin
    }

    fn check_distinct(&self) -> Result<()> {
        let finite = self.t.is_finite()
            && self.t_prime.is_finite()
            && self
                .x
                .iter()
                .chain(self.x_prime.iter())
                .all(|c| c.is_finite());
        if !finite {
            return Err(Error::domain("spacetime points must be finite"));
        }
        if self.separation() == 0.0 && self.dt() == 0.0 {
            return Err(Error::domain(
                "coincident points: the two-point function diverges (see the self-energy shift)",
            ));
        }
        Ok(())
    }

    /// The regulator used when none is given:
    /// `10⁻³ × min(r̃, |Δt|, |r̃ − |Δt||)` over the non-zero scales.
    pub fn default_epsilon(&self) -> f64 {
        let r = self.separation();
        let s = self.dt().abs();
        let scale = [r, s, (r - s).abs()]
            .into_iter()
            .filter(|v| *v > 0.0)
            .fold(f64::INFINITY, f64::min);
        DEFAULT_EPSILON_FACTOR * scale
    }

    fn unit_separation(&self) -> Vector3<f64> {
        let d = self.x - self.x_prime;
        let r = d.norm();
        if r == 0.0 {
            Vector3::zeros()
        } else {
            d / r
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WightmanTensor {
    pub pairing: Pairing,
    pub value: Matrix3<Complex64>,
}

impl WightmanTensor {
    pub fn max_abs(&self) -> f64 {
        self.value.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn re(&self) -> Matrix3<f64> {
        self.value.map(|z| z.re)
    }

    pub fn im(&self) -> Matrix3<f64> {
        self.value.map(|z| z.im)
    }

    /// Largest entrywise difference relative to the larger of the two norms.
    pub fn relative_difference(&self, other: &WightmanTensor) -> f64 {
        let diff = (self.value - other.value)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        let scale = self.max_abs().max(other.max_abs());
        if scale == 0.0 {
            diff
        } else {
            diff / scale
        }
    }
}

fn complex(m: Matrix3<f64>) -> Matrix3<Complex64> {
    m.map(Complex64::from)
}

/// Off-cone closed form.
pub fn wightman_closed(pairing: Pairing, p: &SpacetimePointPair) -> Result<WightmanTensor> {
    p.check_distinct()?;
    if !p.off_lightcone(LIGHTCONE_MARGIN) {
        return Err(Error::domain(format!(
            "point pair lies on the light cone (relative distance {:e}); only off-cone values are available",
            p.lightcone_distance()
        )));
    }
    let r = p.separation();
    let s = -p.dt();
    let n = p.unit_separation();
    let r2 = r * r;
    let s2 = s * s;
    let sigma3 = (r2 - s2).powi(3);
    let ee =
        || (n * n.transpose() * (2.0 * r2) - Matrix3::identity() * (r2 + s2)) / (PI * PI * sigma3);
    let be = || {
        let beta = 16.0 * s * r / sigma3;
        epsilon_contract(&n) * (-beta / (8.0 * PI * PI))
    };
    let value = match pairing {
        Pairing::EE | Pairing::BB => complex(ee()),
        Pairing::BE => complex(be()),
        Pairing::EB => complex(be().transpose()),
    };
    Ok(WightmanTensor { pairing, value })
}

/// `∫₀^∞ k^n e^{−kw} sin(kr) dk` and the cosine analogue.
fn laplace_sin_cos(n: u32, w: Complex64, r: f64) -> (Complex64, Complex64) {
    let fact = (1..=n).fold(1.0, |a, k| a * k as f64);
    let minus = (w - Complex64::i() * r).powi(-(n as i32 + 1));
    let plus = (w + Complex64::i() * r).powi(-(n as i32 + 1));
    let sin = (minus - plus) * fact / (2.0 * Complex64::i());
    let cos = (minus + plus) * (0.5 * fact);
    (sin, cos)
}

/// Regulated momentum-space form at finite `ε`.
pub fn wightman_momentum(
    pairing: Pairing,
    p: &SpacetimePointPair,
    epsilon: f64,
) -> Result<WightmanTensor> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::domain(format!(
            "regulator must be positive, got {epsilon}"
        )));
    }
    p.check_distinct()?;
    let r = p.separation();
    let w = Complex64::new(epsilon, p.dt());
    let n = complex(p.unit_separation() * p.unit_separation().transpose());
    let pref = 1.0 / (4.0 * PI * PI);
    let ee = || {
        if r == 0.0 {
            // ∫ k³ e^{−kw} (2/3) dk
            return Matrix3::<Complex64>::identity() * (Complex64::from(4.0 * pref) / w.powi(4));
        }
        let (s0, _) = laplace_sin_cos(0, w, r);
        let (_, c1) = laplace_sin_cos(1, w, r);
        let (s2, _) = laplace_sin_cos(2, w, r);
        let ja = s2 / r - s0 / (r * r * r) + c1 / (r * r);
        let jb = s0 * 3.0 / (r * r * r) - s2 / r - c1 * 3.0 / (r * r);
        (Matrix3::<Complex64>::identity() * ja + n * jb) * Complex64::from(pref)
    };
    let be = || {
        if r == 0.0 {
            return Matrix3::zeros();
        }
        let (s1, _) = laplace_sin_cos(1, w, r);
        let (_, c2) = laplace_sin_cos(2, w, r);
        let jc = s1 / (r * r) - c2 / r;
        complex(epsilon_contract(&p.unit_separation())) * (-Complex64::i() * pref * jc)
    };
    let value = match pairing {
        Pairing::EE | Pairing::BB => ee(),
        Pairing::BE => be(),
        Pairing::EB => be().transpose(),
    };
    Ok(WightmanTensor { pairing, value })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtrapolatedTensor {
    pub tensor: WightmanTensor,
    /// Largest Richardson error estimate over the entries.
    pub error_estimate: f64,
    pub epsilon: f64,
}

/// `lim_{ε→0}` of the momentum form from `ε₀, ε₀/2, …` by entrywise
/// Richardson extrapolation. Entries that stay at round-off level relative
/// to the whole tensor are set to zero.
pub fn wightman_extrapolated(
    pairing: Pairing,
    p: &SpacetimePointPair,
    epsilon: Option<f64>,
) -> Result<ExtrapolatedTensor> {
    p.check_distinct()?;
    let eps0 = epsilon.unwrap_or_else(|| p.default_epsilon());
    let mut tables = Vec::with_capacity(RICHARDSON_STEPS);
    let mut h = eps0;
    for _ in 0..RICHARDSON_STEPS {
        tables.push((h, wightman_momentum(pairing, p, h)?));
        h *= 0.5;
    }
    let scale = tables.iter().map(|(_, t)| t.max_abs()).fold(0.0, f64::max);
    let mut value = Matrix3::<Complex64>::zeros();
    let mut error: f64 = 0.0;
    for idx in 0..9 {
        let mut parts = [0.0; 2];
        for (part, slot) in parts.iter_mut().enumerate() {
            let seq: Vec<(f64, f64)> = tables
                .iter()
                .map(|(h, t)| {
                    let z = t.value[idx];
                    (*h, if part == 0 { z.re } else { z.im })
                })
                .collect();
            if seq.iter().all(|(_, v)| v.abs() <= 1e-13 * scale) {
                continue;
            }
            let ex = richardson(&seq)?;
            *slot = ex.value;
            error = error.max(ex.error_estimate);
        }
        value[idx] = Complex64::new(parts[0], parts[1]);
    }
    Ok(ExtrapolatedTensor {
        tensor: WightmanTensor { pairing, value },
        error_estimate: error,
        epsilon: eps0,
    })
}

/// `⟨E'^i E'^j⟩` for the electric field seen by an observer with the given
/// velocity, expressed through the lab-frame tensors at the given (lab)
/// coordinates: `E' = γ(E + v × B) + (1 − γ)(E·e_v) e_v`.
pub fn boost_wightman(p: &SpacetimePointPair, boost: &BoostParameters) -> Result<WightmanTensor> {
    let ee = wightman_closed(Pairing::EE, p)?.value;
    let eb = wightman_closed(Pairing::EB, p)?.value;
    let be = wightman_closed(Pairing::BE, p)?.value;
    let bb = wightman_closed(Pairing::BB, p)?.value;
    Ok(WightmanTensor {
        pairing: Pairing::EE,
        value: FieldBoost::new(boost).combine(&ee, &eb, &be, &bb),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pair() -> SpacetimePointPair {
        SpacetimePointPair::new(
            0.4,
            Vector3::new(0.1, 0.7, -0.3),
            -0.2,
            Vector3::new(-0.5, 0.2, 0.9),
        )
    }

    #[test]
    fn coincident_points_are_refused() {
        let p = SpacetimePointPair::new(1.0, Vector3::zeros(), 1.0, Vector3::zeros());
        assert!(wightman_closed(Pairing::EE, &p).is_err());
        assert!(wightman_momentum(Pairing::EE, &p, 1e-3).is_err());
    }

    #[test]
    fn lightcone_is_refused() {
        let p = SpacetimePointPair::new(1.0, Vector3::zeros(), 0.0, Vector3::new(0.0, 0.0, 1.0));
        assert!(wightman_closed(Pairing::EE, &p)
            .unwrap_err()
            .is_validation());
    }

    #[test]
    fn separation_along_z() {
        let p = SpacetimePointPair::new(0.0, Vector3::new(0.0, 0.0, 2.0), 0.0, Vector3::zeros());
        let n = p.unit_separation();
        let x = n * n.transpose() - Matrix3::identity();
        assert_eq!(x, Matrix3::from_diagonal(&Vector3::new(-1.0, -1.0, 0.0)));
    }

    #[test]
    fn equal_time_is_real() {
        let mut p = pair();
        p.t_prime = p.t;
        let w = wightman_closed(Pairing::EE, &p).unwrap();
        assert_eq!(w.im().abs().max(), 0.0);
        // 1/r⁴ at equal times: W_xx = −1/(π² r⁴) for a separation along x
        let q = SpacetimePointPair::new(0.0, Vector3::new(0.0, 3.0, 0.0), 0.0, Vector3::zeros());
        let w = wightman_closed(Pairing::EE, &q).unwrap();
        assert_relative_eq!(
            w.value[(0, 0)].re,
            -1.0 / (PI * PI * 81.0),
            max_relative = 1e-14
        );
        assert_relative_eq!(
            w.value[(1, 1)].re,
            1.0 / (PI * PI * 81.0),
            max_relative = 1e-14
        );
    }

    #[test]
    fn momentum_form_converges_to_closed_form() {
        let p = pair();
        for pairing in Pairing::ALL {
            let ex = wightman_extrapolated(pairing, &p, None).unwrap();
            let closed = wightman_closed(pairing, &p).unwrap();
            let rel = ex.tensor.relative_difference(&closed);
            assert!(rel < 1e-8, "{pairing}: {rel:e}");
        }
    }

    #[test]
    fn pure_time_separation_limit() {
        let p = SpacetimePointPair::new(0.5, Vector3::zeros(), -0.5, Vector3::zeros());
        let closed = wightman_closed(Pairing::EE, &p).unwrap();
        assert_relative_eq!(
            closed.value[(0, 0)].re,
            1.0 / (PI * PI),
            max_relative = 1e-14
        );
        let m = wightman_extrapolated(Pairing::EE, &p, None).unwrap();
        assert!(m.tensor.relative_difference(&closed) < 1e-9);
    }

    #[test]
    fn identity_boost() {
        let p = pair();
        let b = boost_wightman(&p, &BoostParameters::along_z(0.0).unwrap()).unwrap();
        let w = wightman_closed(Pairing::EE, &p).unwrap();
        assert!(b.relative_difference(&w) < 1e-15);
    }

    #[test]
    fn pairing_labels() {
        for p in Pairing::ALL {
            assert_eq!(p.to_string().parse::<Pairing>().unwrap(), p);
        }
        assert!("XY".parse::<Pairing>().is_err());
    }
}
