//! Vacuum excitation probability of the effective dipole detector with a
//! Gaussian switching `χ(t) = exp(−(t/T)²)`, in the atomic rest frame and
//! as seen by a boosted observer.

use std::cell::RefCell;
use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::empol::{boost_matrix_m, transverse_projector, BoostParameters, WaveVector};
use crate::error::{Error, Result};
use crate::hydrogen::{FormFactor, QuantumNumbers, SmearingVector};
use crate::quad::{
    integrate_1d_with, mc_integrate_detailed, AdaptiveOptions, ImportanceSampler, Interval,
    MonteCarloSpec, SphereRule, Tolerance,
};
use crate::units::{AtomParameters, UnitSystem};

/// `49152 = 294912/6`: the 1s→2p_z transverse form factor integrated over
/// directions, `(8π/3) · 294912 a0²`, times `1/(16π²)`, times π.
pub const CLOSED_FORM_PREFACTOR: f64 = 49_152.0;
/// Fastest boost accepted by the Monte Carlo estimate.
pub const MAX_BOOST_SPEED: f64 = 0.8;
/// Minimum effective sample size for a boosted estimate.
pub const MIN_EFFECTIVE_SAMPLES: f64 = 1_000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SwitchingKind {
    GaussianAdiabatic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwitchingFunction {
    pub kind: SwitchingKind,
    /// Interaction timescale `T` (eV⁻¹).
    pub timescale: f64,
}

impl SwitchingFunction {
    pub fn gaussian(timescale: f64) -> Result<Self> {
        if !(timescale > 0.0 && timescale.is_finite()) {
            return Err(Error::domain(format!(
                "switching timescale must be positive, got {timescale}"
            )));
        }
        Ok(SwitchingFunction {
            kind: SwitchingKind::GaussianAdiabatic,
            timescale,
        })
    }

    pub fn value(&self, t: f64) -> f64 {
        let x = t / self.timescale;
        (-x * x).exp()
    }

    /// `∫ dt χ(t) e^{−iωt} = √π T exp(−T²ω²/4)` (real for an even χ).
    pub fn transform(&self, omega: f64) -> f64 {
        let t = self.timescale;
        PI.sqrt() * t * (-0.25 * t * t * omega * omega).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VepMethod {
    ClosedRadial,
    FullPipeline,
    BoostedMC,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VepResult {
    pub probability: f64,
    pub method: VepMethod,
    pub error_estimate: f64,
    pub samples: Option<u64>,
    pub effective_sample_size: Option<f64>,
}

impl VepResult {
    /// First-order perturbation theory is only meaningful for `P ≤ 1`.
    pub fn perturbative(&self) -> bool {
        self.probability <= 1.0
    }
}

fn integrate_k<F: FnMut(f64) -> f64>(
    f: F,
    scale: f64,
    tol: Tolerance,
    context: &str,
) -> Result<(f64, f64)> {
    let r = integrate_1d_with(
        f,
        Interval::semi_infinite(0.0, scale),
        tol,
        &AdaptiveOptions {
            max_subdivisions: 4000,
            initial_segments: 16,
        },
    );
    let v = r.require(context, tol)?;
    Ok((v, r.error_estimate))
}

/// Typical photon momentum of the integrand: the smaller of `1/a0` and the
/// maximum of `k³ exp(−T²(k²/2 + kΩ))`.
fn k_scale(t: f64, params: &AtomParameters) -> f64 {
    let t2 = t * t;
    let w = params.omega.max(0.0);
    let mode = (-t2 * w + (t2 * t2 * w * w + 12.0 * t2).sqrt()) / (2.0 * t2);
    mode.min(1.0 / params.a0)
}

/// The reduced radial integral for the 1s→2p_z transition:
/// `P = 49152 e² a0² T²/π ∫₀^∞ dk k³ exp(−T²(k + Ω)²/2) / (4a0²k² + 9)⁶`.
///
/// The factor `exp(−T²Ω²/2)` is pulled out of the integral so that long
/// switching times do not underflow inside the quadrature.
pub fn vep_rest_closed(t: f64, params: &AtomParameters, units: &UnitSystem) -> Result<VepResult> {
    let sw = SwitchingFunction::gaussian(t)?;
    let t2 = sw.timescale * sw.timescale;
    let a2 = params.a0 * params.a0;
    let omega = params.omega;
    let integrand = |k: f64| {
        let g = (-t2 * k * (0.5 * k + omega)).exp();
        if g == 0.0 {
            return 0.0;
        }
        k * k * k * g / (4.0 * a2 * k * k + 9.0).powi(6)
    };
    let tol = Tolerance::new(0.0, 1e-12);
    let (j, err) = integrate_k(
        integrand,
        k_scale(t, params),
        tol,
        "closed-form excitation integral",
    )?;
    let pref = CLOSED_FORM_PREFACTOR * units.e_squared() * a2 * t2 / PI
        * (-0.5 * t2 * omega * omega).exp();
    Ok(VepResult {
        probability: pref * j,
        method: VepMethod::ClosedRadial,
        error_estimate: pref * err,
        samples: None,
        effective_sample_size: None,
    })
}

/// `n` logarithmically spaced timescales from `t_min` to `t_max` inclusive.
pub fn log_grid(t_min: f64, t_max: f64, n: usize) -> Result<Vec<f64>> {
    if !(t_min > 0.0 && t_max > t_min && n >= 2) {
        return Err(Error::domain(
            "log grid needs 0 < t_min < t_max and at least two points",
        ));
    }
    let (a, b) = (t_min.ln(), t_max.ln());
    Ok((0..n)
        .map(|i| {
            if i == 0 {
                t_min
            } else if i + 1 == n {
                t_max
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect())
}

/// [`vep_rest_closed`] on a log grid, evaluated in parallel and returned in
/// grid order.
pub fn vep_curve(
    t_min: f64,
    t_max: f64,
    n: usize,
    params: &AtomParameters,
    units: &UnitSystem,
) -> Result<Vec<(f64, VepResult)>> {
    log_grid(t_min, t_max, n)?
        .into_par_iter()
        .map(|t| vep_rest_closed(t, params, units).map(|r| (t, r)))
        .collect()
}

/// `P = e²/(16π²) T² ∫ d³k |k| exp(−T²(Ω + |k|)²/2) [|f_ba|² − |f_ba·e_k|²]`
/// for the excitation `a → b`, with the form factor from the hydrogenic
/// expansion and the angular integral done by a product rule exact for the
/// multipoles present.
pub fn vep_rest_pipeline(
    a: QuantumNumbers,
    b: QuantumNumbers,
    t: f64,
    params: &AtomParameters,
    units: &UnitSystem,
) -> Result<VepResult> {
    let sw = SwitchingFunction::gaussian(t)?;
    let ff = FormFactor::new(b, a, params)?;
    let order = (2 * ff.max_order() as usize + 3).max(SphereRule::MIN_ORDER);
    let rule = SphereRule::new(order)?;
    let t2 = sw.timescale * sw.timescale;
    let omega = params.omega;
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let integrand = |k: f64| {
        if failure.borrow().is_some() {
            return 0.0;
        }
        let g = (-t2 * k * (0.5 * k + omega)).exp();
        if g == 0.0 || k == 0.0 {
            return 0.0;
        }
        let radials = match ff.radial_integrals(k) {
            Ok(r) => r,
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                return 0.0;
            }
        };
        let angular = rule
            .integrate(|n| {
                let f = ff.evaluate_with(&(n * k), &radials);
                let total: f64 = f.iter().map(|c| c.norm_sqr()).sum();
                let along = (f[0] * n.x + f[1] * n.y + f[2] * n.z).norm_sqr();
                // a longitudinal form factor leaves only cancellation noise
                let transverse = total - along;
                if transverse <= 64.0 * f64::EPSILON * total {
                    0.0
                } else {
                    transverse
                }
            })
            .value;
        k * k * k * g * angular
    };
    let tol = Tolerance::new(0.0, 1e-11);
    let scale = k_scale(t, params);
    let (j, err) = integrate_k(integrand, scale, tol, "excitation pipeline")?;
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    let pref = units.e_squared() * t2 / (16.0 * PI * PI) * (-0.5 * t2 * omega * omega).exp();
    Ok(VepResult {
        probability: pref * j,
        method: VepMethod::FullPipeline,
        error_estimate: pref * err,
        samples: None,
        effective_sample_size: None,
    })
}

/// A spacetime event `(t, x)`.
pub type Event = (f64, Vector3<f64>);

/// Ingredients shared by the rest-frame and boosted integrands for the
/// 1s→2p_z excitation.
#[derive(Debug, Clone, Copy)]
pub struct ExcitationSetup {
    pub switching: SwitchingFunction,
    pub smearing: SmearingVector,
    pub omega: f64,
}

impl ExcitationSetup {
    pub fn new(t: f64, params: &AtomParameters) -> Result<Self> {
        Ok(ExcitationSetup {
            switching: SwitchingFunction::gaussian(t)?,
            smearing: SmearingVector::new(
                QuantumNumbers::two_pz(),
                QuantumNumbers::ground(),
                params,
            )?,
            omega: params.omega,
        })
    }

    /// `F_{2p_z,1s}(ξ)`, which is real.
    pub fn smearing_at(&self, xi: &Vector3<f64>) -> Vector3<f64> {
        self.smearing.evaluate(xi).map(|c| c.re)
    }

    /// The rest-frame integrand of the excitation probability (without the
    /// constant `e²/(2(2π)³)`):
    /// `|k| e^{iφ₁} e^{−iφ₂} χ(τ₁)χ(τ₂) F(ξ₁)·(δ − e e)·F(ξ₂)`,
    /// `φ = −|k|τ + k·ξ − Ωτ`.
    pub fn rest_integrand(&self, k: &Vector3<f64>, e1: &Event, e2: &Event) -> Result<Complex64> {
        let wk = WaveVector::new(*k)?;
        let proj = transverse_projector(&wk).t;
        let kn = wk.magnitude();
        let phase = |e: &Event| -kn * e.0 + k.dot(&e.1) - self.omega * e.0;
        Ok(self.assemble(kn, phase(e1) - phase(e2), e1.0, e2.0, &e1.1, &e2.1, &proj))
    }

    /// The same integrand written in lab coordinates for an observer boosted
    /// along ẑ: `τ(t, x)` and `ξ(t, x)` are obtained from the Lorentz map,
    /// the phases use the lab wavevector and the polarization structure is
    /// the boost matrix `M(k)`.
    pub fn boosted_integrand(
        &self,
        k: &Vector3<f64>,
        e1: &Event,
        e2: &Event,
        boost: &BoostParameters,
    ) -> Result<Complex64> {
        let wk = WaveVector::new(*k)?;
        let m = boost_matrix_m(&wk, boost)?;
        let kn = wk.magnitude();
        let (tau1, xi1) = boost.to_moving(e1.0, &e1.1);
        let (tau2, xi2) = boost.to_moving(e2.0, &e2.1);
        let phi1 = -kn * e1.0 + k.dot(&e1.1) - self.omega * tau1;
        let phi2 = -kn * e2.0 + k.dot(&e2.1) - self.omega * tau2;
        Ok(self.assemble(kn, phi1 - phi2, tau1, tau2, &xi1, &xi2, &m))
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        &self,
        kn: f64,
        dphi: f64,
        tau1: f64,
        tau2: f64,
        xi1: &Vector3<f64>,
        xi2: &Vector3<f64>,
        tensor: &Matrix3<f64>,
    ) -> Complex64 {
        let f1 = self.smearing_at(xi1);
        let f2 = self.smearing_at(xi2);
        let chi = self.switching.value(tau1) * self.switching.value(tau2);
        Complex64::from_polar(kn * chi * f1.dot(&(tensor * f2)), dphi)
    }
}

/// One draw of the boosted estimator: a lab wavevector and two rest-frame
/// smearing positions.
#[derive(Debug, Clone, Copy)]
pub struct BoostedSample {
    pub k: Vector3<f64>,
    pub xi1: Vector3<f64>,
    pub xi2: Vector3<f64>,
}

/// Proposal for the boosted estimate. Rest-frame photon momenta follow a
/// Gamma(4, θ) law with isotropic directions and are mapped to the lab
/// frame; positions follow `r⁴ e^{−3r/2a0} |cos ϑ|`, the envelope of
/// `|F_{2p_z,1s}|`.
#[derive(Debug, Clone, Copy)]
pub struct BoostedSampler {
    pub boost: BoostParameters,
    pub theta: f64,
    pub b: f64,
}

impl BoostedSampler {
    pub fn new(t: f64, boost: BoostParameters, params: &AtomParameters) -> Self {
        BoostedSampler {
            boost,
            theta: k_scale(t, params) / 3.0 * 1.5,
            b: 1.5 / params.a0,
        }
    }

    fn gamma4_pdf(&self, k: f64) -> f64 {
        let x = k / self.theta;
        x * x * x * (-x).exp() / (6.0 * self.theta)
    }

    /// Lab-frame density of `k`.
    pub fn k_density(&self, k: &Vector3<f64>) -> f64 {
        let (w_rest, _) = self.boost.transform_wavevector(k);
        let kn = k.norm();
        // d³k = (|k|/|k'|) d³k'
        self.gamma4_pdf(w_rest) / (4.0 * PI * w_rest * w_rest) * w_rest / kn
    }

    pub fn position_density(&self, xi: &Vector3<f64>) -> f64 {
        let r = xi.norm();
        let b = self.b;
        let cos = if r == 0.0 { 0.0 } else { (xi.z / r).abs() };
        b.powi(5) * r * r * (-b * r).exp() * cos / (48.0 * PI)
    }

    fn draw_position(&self, rng: &mut ChaCha8Rng) -> Vector3<f64> {
        let r = Gamma::new(5.0, 1.0 / self.b)
            .expect("valid gamma")
            .sample(rng);
        let u: f64 = rng.gen::<f64>().sqrt();
        let cos = if rng.gen::<bool>() { u } else { -u };
        let sin = (1.0 - cos * cos).max(0.0).sqrt();
        let phi = 2.0 * PI * rng.gen::<f64>();
        Vector3::new(r * sin * phi.cos(), r * sin * phi.sin(), r * cos)
    }

    fn draw_k(&self, rng: &mut ChaCha8Rng) -> Vector3<f64> {
        let kr: f64 = Gamma::new(4.0, self.theta)
            .expect("valid gamma")
            .sample(rng);
        let cos: f64 = 2.0 * rng.gen::<f64>() - 1.0;
        let sin = (1.0 - cos * cos).max(0.0).sqrt();
        let phi = 2.0 * PI * rng.gen::<f64>();
        let k_rest = Vector3::new(kr * sin * phi.cos(), kr * sin * phi.sin(), kr * cos);
        // inverse Doppler map back to the lab
        let inverse =
            BoostParameters::new(self.boost.speed(), -self.boost.direction()).expect("valid boost");
        inverse.transform_wavevector(&k_rest).1
    }
}

impl ImportanceSampler for BoostedSampler {
    type Point = BoostedSample;

    fn draw(&self, rng: &mut ChaCha8Rng) -> (BoostedSample, f64) {
        let k = self.draw_k(rng);
        let xi1 = self.draw_position(rng);
        let xi2 = self.draw_position(rng);
        let q = self.k_density(&k) * self.position_density(&xi1) * self.position_density(&xi2);
        (BoostedSample { k, xi1, xi2 }, q)
    }
}

/// Excitation probability evaluated in the frame of an observer moving
/// along ẑ with speed `v`.
///
/// The lab-frame integrand is integrated over the observer's `(k, x, x')`
/// by Monte Carlo. Along each worldline of fixed rest-frame position `ξ`
/// the lab phase `−|k|t + k·x − Ωτ` is linear in the proper time `τ`, so
/// the time integral against the Gaussian switching is done in closed form
/// there; the lab coordinates of each worldline come from the Lorentz map.
pub fn vep_boosted(
    t: f64,
    boost: &BoostParameters,
    params: &AtomParameters,
    units: &UnitSystem,
    mc: &MonteCarloSpec,
) -> Result<VepResult> {
    if !boost.is_along_z() {
        return Err(Error::domain(
            "the boosted excitation probability is defined for boosts along z",
        ));
    }
    if boost.speed() > MAX_BOOST_SPEED {
        return Err(Error::domain(format!(
            "boost speed {} exceeds the supported maximum {MAX_BOOST_SPEED}",
            boost.speed()
        )));
    }
    let setup = ExcitationSetup::new(t, params)?;
    let sampler = BoostedSampler::new(t, *boost, params);
    let c = units.e_squared() / (2.0 * (2.0 * PI).powi(3));
    let sw = setup.switching;
    let worldline = |kn: f64, k: &Vector3<f64>, xi: &Vector3<f64>| {
        let (t0, x0) = boost.to_lab(0.0, xi);
        let (t1, x1) = boost.to_lab(1.0, xi);
        let psi0 = -kn * t0 + k.dot(&x0);
        let psi1 = -kn * t1 + k.dot(&x1) - setup.omega - psi0;
        Complex64::from_polar(sw.transform(psi1), psi0)
    };
    let estimator = |s: &BoostedSample| {
        let kn = s.k.norm();
        let m = match WaveVector::new(s.k).and_then(|wk| boost_matrix_m(&wk, boost)) {
            Ok(m) => m,
            Err(_) => return f64::NAN,
        };
        let f1 = setup.smearing_at(&s.xi1);
        let f2 = setup.smearing_at(&s.xi2);
        let time = worldline(kn, &s.k, &s.xi1) * worldline(kn, &s.k, &s.xi2).conj();
        c * kn * time.re * f1.dot(&(m * f2))
    };
    let est = mc_integrate_detailed(estimator, &sampler, mc)?;
    if est.effective_sample_size < MIN_EFFECTIVE_SAMPLES {
        return Err(Error::Numerical(format!(
            "boosted estimate has effective sample size {:.1} (< {MIN_EFFECTIVE_SAMPLES}) from {} samples; value {:e} ± {:e}",
            est.effective_sample_size, est.samples, est.value, est.standard_error
        )));
    }
    Ok(VepResult {
        probability: est.value,
        method: VepMethod::BoostedMC,
        error_estimate: est.standard_error,
        samples: Some(est.samples),
        effective_sample_size: Some(est.effective_sample_size),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn switching_identities() {
        let s = SwitchingFunction::gaussian(1.0).unwrap();
        assert_eq!(s.value(0.0), 1.0);
        assert_eq!(s.value(0.7), s.value(-0.7));
        assert_relative_eq!(s.transform(0.0), PI.sqrt(), epsilon = 1e-15);
        assert!(SwitchingFunction::gaussian(0.0).is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = log_grid(0.01, 10.0, 60).unwrap();
        assert_eq!(g.len(), 60);
        assert_relative_eq!(g[0], 0.01, max_relative = 1e-15);
        assert_eq!(g[59], 10.0);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn closed_form_is_positive_and_vanishes_at_extremes() {
        let p = AtomParameters::paper_figure();
        let u = UnitSystem::paper();
        let mid = vep_rest_closed(1e-3, &p, &u).unwrap().probability;
        assert!(mid > 0.0);
        assert!(vep_rest_closed(1e-9, &p, &u).unwrap().probability < 1e-6 * mid);
        assert!(vep_rest_closed(20.0, &p, &u).unwrap().probability < 1e-6 * mid);
    }
}
