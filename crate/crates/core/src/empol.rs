//! Momentum-space electromagnetic algebra: transverse polarization bases,
//! the recoil-corrected coupling coefficients α, their polarization sum,
//! and Lorentz-boost kinematics for the electric field.

use nalgebra::{Matrix3, Rotation3, Unit, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::AtomParameters;

/// Largest |P|/(Mc) accepted by the non-relativistic coupling.
pub const MAX_MOMENTUM_RATIO: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveVector {
    k: Vector3<f64>,
    magnitude: f64,
    unit: Vector3<f64>,
}

impl WaveVector {
    pub fn new(k: Vector3<f64>) -> Result<Self> {
        let magnitude = k.norm();
        if !(magnitude > 0.0 && magnitude.is_finite()) {
            return Err(Error::domain("wave vector must be finite and non-zero"));
        }
        Ok(WaveVector {
            k,
            magnitude,
            unit: k / magnitude,
        })
    }

    pub fn vector(&self) -> &Vector3<f64> {
        &self.k
    }

    pub fn magnitude(&self) -> f64 {
        self.magnitude
    }

    /// `e_k`.
    pub fn unit(&self) -> &Vector3<f64> {
        &self.unit
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationBasis {
    pub eps1: Vector3<f64>,
    pub eps2: Vector3<f64>,
}

impl PolarizationBasis {
    pub fn get(&self, s: usize) -> Result<Vector3<f64>> {
        match s {
            0 => Ok(self.eps1),
            1 => Ok(self.eps2),
            _ => Err(Error::domain(format!(
                "polarization index must be 0 or 1, got {s}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarizationTensor {
    pub t: Matrix3<f64>,
}

impl PolarizationTensor {
    pub fn max_asymmetry(&self) -> f64 {
        (self.t - self.t.transpose()).abs().max()
    }
}

/// Observer velocity `v` (units of c) along a unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoostParameters {
    v: f64,
    direction: Unit<Vector3<f64>>,
}

impl BoostParameters {
    pub fn new(v: f64, direction: Vector3<f64>) -> Result<Self> {
        if !(0.0..1.0).contains(&v) {
            return Err(Error::domain(format!(
                "boost speed must satisfy 0 <= v < 1, got {v}"
            )));
        }
        let n = direction.norm();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::domain(
                "boost direction must be a finite non-zero vector",
            ));
        }
        Ok(BoostParameters {
            v,
            direction: Unit::new_normalize(direction),
        })
    }

    pub fn along_z(v: f64) -> Result<Self> {
        Self::new(v, Vector3::z())
    }

    pub fn from_rapidity(eta: f64, direction: Vector3<f64>) -> Result<Self> {
        Self::new(eta.tanh(), direction)
    }

    pub fn speed(&self) -> f64 {
        self.v
    }

    pub fn direction(&self) -> &Vector3<f64> {
        self.direction.as_ref()
    }

    pub fn velocity(&self) -> Vector3<f64> {
        self.direction.as_ref() * self.v
    }

    pub fn gamma(&self) -> f64 {
        1.0 / ((1.0 - self.v) * (1.0 + self.v)).sqrt()
    }

    pub fn rapidity(&self) -> f64 {
        self.v.atanh()
    }

    pub fn is_along_z(&self) -> bool {
        (self.direction.z - 1.0).abs() < 1e-14
    }

    /// Maps lab coordinates `(t, x)` to the moving frame `(τ, ξ)`.
    pub fn to_moving(&self, t: f64, x: &Vector3<f64>) -> (f64, Vector3<f64>) {
        let g = self.gamma();
        let e = self.direction.as_ref();
        let par = e.dot(x);
        let tau = g * (t - self.v * par);
        let xi = x + e * (g * (par - self.v * t) - par);
        (tau, xi)
    }

    /// Inverse of [`to_moving`](Self::to_moving).
    pub fn to_lab(&self, tau: f64, xi: &Vector3<f64>) -> (f64, Vector3<f64>) {
        let g = self.gamma();
        let e = self.direction.as_ref();
        let par = e.dot(xi);
        let t = g * (tau + self.v * par);
        let x = xi + e * (g * (par + self.v * tau) - par);
        (t, x)
    }

    /// The wavevector seen in the moving frame, `(ω', k')`, for a lab
    /// photon `k` with `ω = |k|`.
    pub fn transform_wavevector(&self, k: &Vector3<f64>) -> (f64, Vector3<f64>) {
        let g = self.gamma();
        let e = self.direction.as_ref();
        let w = k.norm();
        let par = e.dot(k);
        let w_prime = g * (w - self.v * par);
        let k_prime = k + e * (g * (par - self.v * w) - par);
        (w_prime, k_prime)
    }
}

/// Deterministic right-handed transverse basis: the coordinate axis least
/// aligned with `e_k` (lowest index on ties) is orthogonalised against
/// `e_k` to give `eps1`, and `eps2 = e_k × eps1`.
pub fn polarization_basis(k: &WaveVector) -> PolarizationBasis {
    let e = k.unit();
    let mut axis = 0;
    for i in 1..3 {
        if e[i].abs() < e[axis].abs() {
            axis = i;
        }
    }
    let mut seed = Vector3::zeros();
    seed[axis] = 1.0;
    let eps1 = (seed - e * e[axis]).normalize();
    let eps2 = e.cross(&eps1);
    PolarizationBasis { eps1, eps2 }
}

pub fn transverse_projector(k: &WaveVector) -> PolarizationTensor {
    let e = k.unit();
    PolarizationTensor {
        t: Matrix3::identity() - e * e.transpose(),
    }
}

fn check_momentum(p: &Vector3<f64>, params: &AtomParameters) -> Result<()> {
    let ratio = p.norm() / params.mass;
    if !(ratio < MAX_MOMENTUM_RATIO) {
        return Err(Error::domain(format!(
            "|P|/(Mc) = {ratio:e} violates the non-relativistic bound {MAX_MOMENTUM_RATIO}"
        )));
    }
    Ok(())
}

/// `α_s = ε_s [1 − (P·e_k − |k|/2)/M] + e_k (P·ε_s)/M`.
pub fn alpha_coefficient(
    k: &WaveVector,
    s: usize,
    p: &Vector3<f64>,
    params: &AtomParameters,
) -> Result<Vector3<f64>> {
    check_momentum(p, params)?;
    let eps = polarization_basis(k).get(s)?;
    let e = k.unit();
    let m = params.mass;
    let half_recoil = 0.5 * k.magnitude() / m;
    let scale = 1.0 + (half_recoil - p.dot(e) / m);
    Ok(eps * scale + e * (p.dot(&eps) / m))
}

/// `Σ_s α_s ⊗ α_s` in closed form. With `b = P/M`, `c = 1 + |k|/(2M) − b·e_k`
/// and `b⊥ = b − (b·e_k) e_k`:
///
/// `Σ = c² (δ − e e) + c (b⊥ ⊗ e + e ⊗ b⊥) + |b⊥|² e ⊗ e`.
pub fn polarization_sum(
    k: &WaveVector,
    p: &Vector3<f64>,
    params: &AtomParameters,
) -> Result<PolarizationTensor> {
    check_momentum(p, params)?;
    let e = k.unit();
    let m = params.mass;
    let b = p / m;
    let be = b.dot(e);
    // small terms combined before the unit part
    let c = 1.0 + (0.5 * k.magnitude() / m - be);
    let b_perp = b - e * be;
    let proj = Matrix3::identity() - e * e.transpose();
    let mixed = b_perp * e.transpose() + e * b_perp.transpose();
    let t = proj * (c * c) + mixed * c + e * e.transpose() * b_perp.norm_squared();
    Ok(PolarizationTensor { t })
}

/// The boost matrix `M` for an observer moving along ẑ:
///
/// ```text
/// M11 = γ²(1 − e3 v)² − e1²   M12 = −e1 e2                M13 = γ e1 (v − e3)
/// M22 = γ²(1 − e3 v)² − e2²   M23 = γ e2 (v − e3)         M33 = 1 − e3²
/// ```
pub fn boost_matrix_m(k: &WaveVector, boost: &BoostParameters) -> Result<Matrix3<f64>> {
    if !boost.is_along_z() {
        return Err(Error::domain(
            "boost_matrix_m is defined for boosts along z; use boost_matrix_m_general",
        ));
    }
    let e = k.unit();
    let v = boost.speed();
    let g = boost.gamma();
    let d = g * g * (1.0 - e.z * v).powi(2);
    let m13 = g * e.x * (v - e.z);
    let m23 = g * e.y * (v - e.z);
    Ok(Matrix3::new(
        d - e.x * e.x,
        -e.x * e.y,
        m13,
        -e.x * e.y,
        d - e.y * e.y,
        m23,
        m13,
        m23,
        1.0 - e.z * e.z,
    ))
}

/// Rotation taking `direction` onto ẑ.
pub fn rotation_to_z(direction: &Vector3<f64>) -> Rotation3<f64> {
    Rotation3::rotation_between(direction, &Vector3::z())
        .unwrap_or_else(|| Rotation3::from_axis_angle(&Vector3::x_axis(), std::f64::consts::PI))
}

/// `M` for an arbitrary boost direction, obtained by rotating the boost onto
/// ẑ, evaluating there and rotating back.
pub fn boost_matrix_m_general(k: &WaveVector, boost: &BoostParameters) -> Result<Matrix3<f64>> {
    let r = rotation_to_z(boost.direction());
    let kz = WaveVector::new(r * k.vector())?;
    let bz = BoostParameters::along_z(boost.speed())?;
    let m = boost_matrix_m(&kz, &bz)?;
    let rm = r.matrix();
    Ok(rm.transpose() * m * rm)
}

/// `[ε^{ijl} e_l]`, the antisymmetric matrix of a vector.
pub fn epsilon_contract(e: &Vector3<f64>) -> Matrix3<f64> {
    e.cross_matrix().transpose()
}

/// Linear map from lab fields to the electric field in a moving frame,
/// `E' = γ(E + v × B) + (1 − γ)(E·e_v) e_v = L E + N B`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldBoost {
    pub l: Matrix3<f64>,
    pub n: Matrix3<f64>,
}

impl FieldBoost {
    pub fn new(boost: &BoostParameters) -> Self {
        let g = boost.gamma();
        let e = boost.direction();
        FieldBoost {
            l: Matrix3::identity() * g + e * e.transpose() * (1.0 - g),
            n: boost.velocity().cross_matrix() * g,
        }
    }

    /// `⟨E'^i E'^j⟩` from the four lab-frame pairings.
    pub fn combine(
        &self,
        ee: &Matrix3<Complex64>,
        eb: &Matrix3<Complex64>,
        be: &Matrix3<Complex64>,
        bb: &Matrix3<Complex64>,
    ) -> Matrix3<Complex64> {
        let l = self.l.map(Complex64::from);
        let n = self.n.map(Complex64::from);
        l * ee * l.transpose()
            + l * eb * n.transpose()
            + n * be * l.transpose()
            + n * bb * n.transpose()
    }
}
