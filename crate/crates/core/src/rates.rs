//! Spontaneous-emission rates for an atom whose centre of mass is delocalised
//! in momentum, including recoil, Doppler shift and the Röntgen coupling.
//!
//! The golden-rule rate is reduced to the kernel
//!
//! ```text
//! g(P) = 1/(4M) ∫_{-1}^{1} dz  k*³ tr Σ(k*, P, z) / κ
//! ```
//!
//! where `k*` is the root of the energy-conservation delta, `κ` its Jacobian
//! and `Σ` the polarization-sum tensor. The rate is then
//! `Γ = e² |d|² (4M/3) ∫ dP P² |φ(P)|² g(P)`, which reduces to
//! `Γ₀ = e² |d|² Ω³ / (3π)` for an infinitely heavy atom.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::empol::MAX_MOMENTUM_RATIO;
use crate::error::{Error, Result};
use crate::hydrogen::{dipole_matrix_element, radial_moment, QuantumNumbers};
use crate::quad::{pairwise_sum, GaussLegendre};
use crate::units::{seconds_inverse_from_ev, AtomParameters, UnitSystem};

/// Gauss–Legendre nodes for the `z = e_P·e_k` integral.
pub const ANGULAR_NODES: usize = 32;
/// Gauss–Legendre nodes for the COM momentum integral.
pub const MOMENTUM_NODES: usize = 64;
/// The momentum integral is cut at this many standard deviations.
pub const MOMENTUM_CUTOFF_SIGMAS: f64 = 8.0;
/// Largest probability mass allowed beyond the momentum cutoff.
pub const MOMENTUM_TAIL_BOUND: f64 = 1e-6;

/// Isotropic Gaussian COM wavepacket,
/// `φ(P) = (2πσ²)^{-3/4} exp(−P²/(4σ²))`, so `∫ |φ|² d³P = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianMomentumDistribution {
    pub sigma_p: f64,
}

impl GaussianMomentumDistribution {
    pub fn new(sigma_p: f64, params: &AtomParameters) -> Result<Self> {
        if !(sigma_p >= 0.0 && sigma_p.is_finite()) {
            return Err(Error::domain(format!(
                "sigma_P must be finite and >= 0, got {sigma_p}"
            )));
        }
        if sigma_p >= MAX_MOMENTUM_RATIO * params.mass {
            return Err(Error::domain(format!(
                "sigma_P/(Mc) = {:e} violates the non-relativistic bound {MAX_MOMENTUM_RATIO}",
                sigma_p / params.mass
            )));
        }
        Ok(GaussianMomentumDistribution { sigma_p })
    }

    /// `σ_P` given as a fraction of `Mc`.
    pub fn in_units_of_mc(ratio: f64, params: &AtomParameters) -> Result<Self> {
        Self::new(ratio * params.mass, params)
    }

    /// `|φ(P)|²`; undefined (and unused) for `σ = 0`.
    pub fn density_squared(&self, p: f64) -> f64 {
        let s2 = self.sigma_p * self.sigma_p;
        (2.0 * PI * s2).powf(-1.5) * (-0.5 * p * p / s2).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaParameters {
    pub kappa: f64,
    pub p: f64,
    pub z: f64,
    pub omega: f64,
}

impl KappaParameters {
    /// `κ = √((1 − Pz/M)² + 2Ω/M)`.
    pub fn new(p: f64, z: f64, omega: f64, params: &AtomParameters) -> Result<Self> {
        let b = 1.0 - p * z / params.mass;
        let k2 = b * b + 2.0 * omega / params.mass;
        if !(k2 > 0.0) {
            return Err(Error::domain(format!("kappa^2 = {k2:e} is not positive")));
        }
        Ok(KappaParameters {
            kappa: k2.sqrt(),
            p,
            z,
            omega,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaRootSolution {
    pub k_star: f64,
    pub jacobian: f64,
    pub in_support: bool,
}

fn check_kinematics(p: f64, z: f64, params: &AtomParameters) -> Result<()> {
    if !(-1.0..=1.0).contains(&z) {
        return Err(Error::domain(format!("z must lie in [-1, 1], got {z}")));
    }
    if !(p >= 0.0 && p < MAX_MOMENTUM_RATIO * params.mass) {
        return Err(Error::domain(format!(
            "P must satisfy 0 <= P < {MAX_MOMENTUM_RATIO} Mc, got P/(Mc) = {:e}",
            p / params.mass
        )));
    }
    Ok(())
}

/// Positive root of `k²/(2M) − Pzk/M + k − Ω = 0`.
///
/// Inside the non-relativistic guard `1 − Pz/M > 0`, so at most one root is
/// positive; it exists iff `Ω > 0`. A root at `k = 0` is outside the support.
pub fn delta_root(
    p: f64,
    z: f64,
    omega: f64,
    params: &AtomParameters,
) -> Result<DeltaRootSolution> {
    check_kinematics(p, z, params)?;
    let kp = KappaParameters::new(p, z, omega, params)?;
    let b = 1.0 - p * z / params.mass;
    // 2Ω/(κ + b) = M(κ − b) without the cancellation
    let k_star = 2.0 * omega / (kp.kappa + b);
    Ok(DeltaRootSolution {
        k_star,
        jacobian: kp.kappa,
        in_support: k_star > 0.0,
    })
}

/// `∫₀^∞ dk k³ δ(k²/(2M) − Pzk/M + k − Ω) (a0 + a1 k + a2 k²)` evaluated
/// on the root. `poly = [a0, a1, a2]`.
pub fn delta_radial_integral(
    p: f64,
    z: f64,
    omega: f64,
    poly: [f64; 3],
    params: &AtomParameters,
) -> Result<f64> {
    let root = delta_root(p, z, omega, params)?;
    if !root.in_support {
        return Ok(0.0);
    }
    let k = root.k_star;
    Ok(k.powi(3) * (poly[0] + k * (poly[1] + k * poly[2])) / root.jacobian)
}

/// Coefficients of `tr Σ` as a polynomial in `k` at fixed `(P, z)`:
/// `tr Σ = 2(1 − βz + k/2M)² + β²(1 − z²)` with `β = P/M`.
pub fn trace_polynomial(p: f64, z: f64, params: &AtomParameters) -> [f64; 3] {
    let m = params.mass;
    let beta = p / m;
    let b = 1.0 - beta * z;
    [
        2.0 * b * b + beta * beta * (1.0 - z * z),
        2.0 * b / m,
        0.5 / (m * m),
    ]
}

/// The rate kernel `g(P)`, with no expansion in `Ω/M` or `P/M`.
pub fn g_function_exact(p: f64, params: &AtomParameters) -> Result<f64> {
    check_kinematics(p, 0.0, params)?;
    let gl = GaussLegendre::new(ANGULAR_NODES);
    let mut terms = Vec::with_capacity(ANGULAR_NODES);
    for (z, w) in gl.nodes.iter().zip(&gl.weights) {
        let poly = trace_polynomial(p, *z, params);
        terms.push(w * delta_radial_integral(p, *z, params.omega, poly, params)?);
    }
    Ok(pairwise_sum(&terms) / (4.0 * params.mass))
}

/// `g(P) ≈ P₀² (1 − (3/2) Ω/M + (2/3) (P/M)²)`, the expansion as published.
pub fn g_function_series(p: f64, params: &AtomParameters) -> f64 {
    let beta = p / params.mass;
    params.p0_squared() * (1.0 - 1.5 * params.recoil_ratio() + 2.0 / 3.0 * beta * beta)
}

/// Expansion of [`g_function_exact`] rederived to the same order:
/// `P₀² (1 − (3/2) Ω/M + (4/3) (P/M)²)`.
pub fn g_function_series_rederived(p: f64, params: &AtomParameters) -> f64 {
    let beta = p / params.mass;
    params.p0_squared() * (1.0 - 1.5 * params.recoil_ratio() + 4.0 / 3.0 * beta * beta)
}

fn dipole_norm_squared(
    a: QuantumNumbers,
    b: QuantumNumbers,
    params: &AtomParameters,
) -> Result<f64> {
    let d = dipole_matrix_element(a, b, params)?;
    let norm2: f64 = d.iter().map(|c| c.norm_sqr()).sum();
    if norm2 <= 1e-20 * params.a0 * params.a0 {
        return Err(Error::domain(format!(
            "transition {a} <-> {b} is dipole-forbidden"
        )));
    }
    Ok(norm2)
}

/// `Γ₀ = e² |d_ab|² Ω³ / (3π)` in s⁻¹.
pub fn gamma_zero(
    a: QuantumNumbers,
    b: QuantumNumbers,
    params: &AtomParameters,
    units: &UnitSystem,
) -> Result<f64> {
    let d2 = dipole_norm_squared(a, b, params)?;
    Ok(seconds_inverse_from_ev(
        units.e_squared() * d2 * params.omega.powi(3) / (3.0 * PI),
    ))
}

/// `1 − (3/2) Ω/M + (2/3) (σ/M)²`.
pub fn correction_factor(dist: &GaussianMomentumDistribution, params: &AtomParameters) -> f64 {
    let s = dist.sigma_p / params.mass;
    1.0 - 1.5 * params.recoil_ratio() + 2.0 / 3.0 * s * s
}

/// `Γ₀ (1 − (3/2) Ω/M + (2/3) (σ_P/M)²)` in s⁻¹.
pub fn gamma_closed(
    dist: &GaussianMomentumDistribution,
    a: QuantumNumbers,
    b: QuantumNumbers,
    params: &AtomParameters,
    units: &UnitSystem,
) -> Result<f64> {
    Ok(gamma_zero(a, b, params, units)? * correction_factor(dist, params))
}

/// `∫₀^∞ dP P² |φ(P)|² g(P)`; for `σ = 0` this is `g(0)/(4π)`.
pub fn momentum_averaged_kernel(
    dist: &GaussianMomentumDistribution,
    params: &AtomParameters,
) -> Result<f64> {
    let sigma = dist.sigma_p;
    if sigma == 0.0 {
        return Ok(g_function_exact(0.0, params)? / (4.0 * PI));
    }
    // P = σu; the kernel is only defined below the non-relativistic bound
    let u_max =
        MOMENTUM_CUTOFF_SIGMAS.min(MAX_MOMENTUM_RATIO * params.mass / sigma * (1.0 - 1e-12));
    let tail = gaussian_radial_tail(u_max);
    if tail > MOMENTUM_TAIL_BOUND {
        return Err(Error::domain(format!(
            "sigma_P/(Mc) = {:e} puts {tail:e} of the momentum distribution beyond the non-relativistic bound",
            sigma / params.mass
        )));
    }
    let gl = GaussLegendre::new(MOMENTUM_NODES);
    let half = 0.5 * u_max;
    let mut terms = Vec::with_capacity(MOMENTUM_NODES);
    for (x, w) in gl.nodes.iter().zip(&gl.weights) {
        let u = half * (1.0 + x);
        terms.push(w * u * u * (-0.5 * u * u).exp() * g_function_exact(sigma * u, params)?);
    }
    Ok(half * pairwise_sum(&terms) * (2.0 * PI).powf(-1.5))
}

/// Fraction of `∫₀^∞ u² e^{−u²/2} du` lying beyond `u`.
fn gaussian_radial_tail(u: f64) -> f64 {
    // ∫_u^∞ u² e^{−u²/2} = u e^{−u²/2} + ∫_u^∞ e^{−u²/2}, the latter bounded by e^{−u²/2}/u
    let e = (-0.5 * u * u).exp();
    (u * e + e / u) / (0.5 * PI).sqrt()
}

/// The golden-rule rate from the exact kernel, in s⁻¹.
pub fn gamma_numeric(
    dist: &GaussianMomentumDistribution,
    a: QuantumNumbers,
    b: QuantumNumbers,
    params: &AtomParameters,
    units: &UnitSystem,
) -> Result<f64> {
    let d2 = dipole_norm_squared(a, b, params)?;
    let kernel = momentum_averaged_kernel(dist, params)?;
    Ok(seconds_inverse_from_ev(
        units.e_squared() * d2 * 4.0 * params.mass / 3.0 * kernel,
    ))
}

/// Expectation of the cutoff-regularised self-energy operator in state `q`:
/// `e² k_uv³/(18π²) [⟨r²⟩ + (Δm/2M)² ⟨r⁴⟩/5]`, in eV.
pub fn self_energy_shift(
    q: QuantumNumbers,
    k_uv: f64,
    params: &AtomParameters,
    units: &UnitSystem,
) -> Result<f64> {
    if !(k_uv > 0.0 && k_uv <= params.reduced_mass) {
        return Err(Error::domain(format!(
            "k_uv must satisfy 0 < k_uv <= mu c = {:e} eV, got {k_uv:e}",
            params.reduced_mass
        )));
    }
    let r2 = radial_moment(q, 2, params)?;
    let r4 = radial_moment(q, 4, params)?;
    let dm = 0.5 * params.delta_m_over_m;
    Ok(units.e_squared() * k_uv.powi(3) / (18.0 * PI * PI) * (r2 + dm * dm * r4 / 5.0))
}
