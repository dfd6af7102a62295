use multipolar::empol::BoostParameters;
use multipolar::hydrogen::{dipole_matrix_element, form_factor};
use multipolar::quad::MonteCarloSpec;
use multipolar::rates::{
    correction_factor, gamma_closed, gamma_numeric, gamma_zero, GaussianMomentumDistribution,
};
use multipolar::vep::{
    log_grid, vep_boosted, vep_rest_closed, vep_rest_pipeline, ExcitationSetup, VepResult,
};
use multipolar::wightman::{
    wightman_closed, wightman_extrapolated, wightman_momentum, Pairing, SpacetimePointPair,
};
use multipolar::{AtomParameters, QuantumNumbers, UnitSystem};
use nalgebra::Vector3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::CliError;

/// A `lower:upper` pair of state labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Transition {
    pub a: QuantumNumbers,
    pub b: QuantumNumbers,
}

impl std::str::FromStr for Transition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| format!("transition '{s}' must look like 1s:2pz"))?;
        let a = a.parse::<QuantumNumbers>().map_err(|e| e.to_string())?;
        let b = b.parse::<QuantumNumbers>().map_err(|e| e.to_string())?;
        Ok(Transition { a, b })
    }
}

impl std::fmt::Display for Transition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.a, self.b)
    }
}

impl Transition {
    fn is_lyman_z(&self) -> bool {
        let (g, p) = (QuantumNumbers::ground(), QuantumNumbers::two_pz());
        (self.a == g && self.b == p) || (self.a == p && self.b == g)
    }
}

/// `lo:hi:n`, logarithmically spaced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogRange {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl std::str::FromStr for LogRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || format!("range '{s}' must look like lo:hi:n");
        if parts.len() != 3 {
            return Err(bad());
        }
        Ok(LogRange {
            lo: parts[0].trim().parse().map_err(|_| bad())?,
            hi: parts[1].trim().parse().map_err(|_| bad())?,
            n: parts[2].trim().parse().map_err(|_| bad())?,
        })
    }
}

pub fn parse_vector<const N: usize>(s: &str) -> Result<[f64; N], String> {
    let values: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("'{s}' is not a list of {N} numbers"))?;
    values
        .try_into()
        .map_err(|_| format!("'{s}' must have exactly {N} components"))
}

/// One pairing, or all four.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairingSet(pub Vec<Pairing>);

impl std::str::FromStr for PairingSet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let p = match s.trim().to_ascii_uppercase().as_str() {
            "ALL" => return Ok(PairingSet(Pairing::ALL.to_vec())),
            "EE" => Pairing::EE,
            "BB" => Pairing::BB,
            "EB" => Pairing::EB,
            "BE" => Pairing::BE,
            other => {
                return Err(format!(
                    "unknown pairing '{other}' (expected EE, BB, EB, BE or all)"
                ))
            }
        };
        Ok(PairingSet(vec![p]))
    }
}

#[derive(Debug, Serialize)]
pub struct RateRecord {
    pub transition: String,
    pub sigma_p_over_mc: f64,
    pub omega_ev: f64,
    pub gamma_0: f64,
    pub correction_factor: f64,
    pub gamma_closed: f64,
    pub gamma_numeric: f64,
}

pub fn rates(
    t: Transition,
    sigmas: &[f64],
    params: &AtomParameters,
    units: &UnitSystem,
) -> Result<Vec<RateRecord>, CliError> {
    let g0 = gamma_zero(t.a, t.b, params, units)?;
    sigmas
        .iter()
        .map(|&s| {
            let dist = GaussianMomentumDistribution::in_units_of_mc(s, params)?;
            Ok(RateRecord {
                transition: t.to_string(),
                sigma_p_over_mc: s,
                omega_ev: params.omega,
                gamma_0: g0,
                correction_factor: correction_factor(&dist, params),
                gamma_closed: gamma_closed(&dist, t.a, t.b, params, units)?,
                gamma_numeric: gamma_numeric(&dist, t.a, t.b, params, units)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VepChoice {
    /// Closed radial formula for 1s↔2p_z at rest, the full pipeline
    /// otherwise, Monte Carlo when boosted.
    Auto,
    Closed,
    Pipeline,
    Boosted,
}

#[derive(Debug, Serialize)]
pub struct VepRecord {
    #[serde(rename = "T")]
    pub t: f64,
    pub probability: f64,
    pub error: f64,
}

pub struct VepRequest {
    pub times: Vec<f64>,
    pub transition: Transition,
    pub method: VepChoice,
    pub v: f64,
    pub samples: u64,
    pub seed: u64,
}

impl VepRequest {
    pub fn times_from(single: Option<f64>, range: Option<LogRange>) -> Result<Vec<f64>, CliError> {
        match (single, range) {
            (Some(t), None) => Ok(vec![t]),
            (None, Some(r)) => Ok(log_grid(r.lo, r.hi, r.n)?),
            (None, None) => Ok(log_grid(1e-6, 1.0, 60)?),
            (Some(_), Some(_)) => Err(CliError::Usage(
                "give either --T or --T-range, not both".into(),
            )),
        }
    }

    pub fn resolved_method(&self) -> VepChoice {
        match self.method {
            VepChoice::Auto if self.v != 0.0 => VepChoice::Boosted,
            VepChoice::Auto if self.transition.is_lyman_z() => VepChoice::Closed,
            VepChoice::Auto => VepChoice::Pipeline,
            m => m,
        }
    }
}

pub fn vep(
    req: &VepRequest,
    params: &AtomParameters,
    units: &UnitSystem,
) -> Result<Vec<VepRecord>, CliError> {
    let method = req.resolved_method();
    if method == VepChoice::Closed && !req.transition.is_lyman_z() {
        return Err(CliError::Usage(
            "the closed formula only covers 1s:2pz".into(),
        ));
    }
    if method == VepChoice::Boosted && !req.transition.is_lyman_z() {
        return Err(CliError::Usage(
            "the boosted estimate only covers 1s:2pz".into(),
        ));
    }
    if method != VepChoice::Boosted && req.v != 0.0 {
        return Err(CliError::Usage(
            "a non-zero --v needs the boosted method".into(),
        ));
    }
    let boost = BoostParameters::along_z(req.v)?;
    let mc = MonteCarloSpec::new(req.samples, req.seed);
    req.times
        .iter()
        .map(|&t| {
            let r: VepResult = match method {
                VepChoice::Closed => vep_rest_closed(t, params, units)?,
                VepChoice::Pipeline => {
                    vep_rest_pipeline(req.transition.a, req.transition.b, t, params, units)?
                }
                _ => vep_boosted(t, &boost, params, units, &mc)?,
            };
            Ok(VepRecord {
                t,
                probability: r.probability,
                error: r.error_estimate,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum WightmanMethod {
    Closed,
    /// Regulated mode sum, extrapolated to zero regulator unless
    /// `--epsilon` fixes one.
    Momentum,
}

#[derive(Debug, Serialize)]
pub struct WightmanRecord {
    pub pairing: String,
    pub i: usize,
    pub j: usize,
    pub re: f64,
    pub im: f64,
}

pub fn wightman(
    pairings: &[Pairing],
    x: [f64; 4],
    xp: [f64; 4],
    method: WightmanMethod,
    epsilon: Option<f64>,
) -> Result<Vec<WightmanRecord>, CliError> {
    let pair = SpacetimePointPair::new(
        x[0],
        Vector3::new(x[1], x[2], x[3]),
        xp[0],
        Vector3::new(xp[1], xp[2], xp[3]),
    );
    let mut out = Vec::with_capacity(9 * pairings.len());
    for &p in pairings {
        let tensor = match (method, epsilon) {
            (WightmanMethod::Closed, _) => wightman_closed(p, &pair)?,
            (WightmanMethod::Momentum, Some(eps)) => wightman_momentum(p, &pair, eps)?,
            (WightmanMethod::Momentum, None) => wightman_extrapolated(p, &pair, None)?.tensor,
        };
        for i in 0..3 {
            for j in 0..3 {
                let z = tensor.value[(i, j)];
                out.push(WightmanRecord {
                    pairing: p.to_string(),
                    i,
                    j,
                    re: z.re,
                    im: z.im,
                });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct MatrixElementRecord {
    pub transition: String,
    pub x_re: f64,
    pub x_im: f64,
    pub y_re: f64,
    pub y_im: f64,
    pub z_re: f64,
    pub z_im: f64,
    pub norm_squared: f64,
    pub norm_squared_over_a0_squared: f64,
}

pub fn matrix_element(
    t: Transition,
    params: &AtomParameters,
) -> Result<Vec<MatrixElementRecord>, CliError> {
    let d = dipole_matrix_element(t.a, t.b, params)?;
    let norm2: f64 = d.iter().map(|c| c.norm_sqr()).sum();
    Ok(vec![MatrixElementRecord {
        transition: t.to_string(),
        x_re: d.x.re,
        x_im: d.x.im,
        y_re: d.y.re,
        y_im: d.y.im,
        z_re: d.z.re,
        z_im: d.z.im,
        norm_squared: norm2,
        norm_squared_over_a0_squared: norm2 / (params.a0 * params.a0),
    }])
}

#[derive(Debug, Serialize)]
pub struct FormFactorRecord {
    pub transition: String,
    pub kx: f64,
    pub ky: f64,
    pub kz: f64,
    pub fx_re: f64,
    pub fx_im: f64,
    pub fy_re: f64,
    pub fy_im: f64,
    pub fz_re: f64,
    pub fz_im: f64,
    /// `|f|² − |f·k̂|²`.
    pub transverse: f64,
}

pub fn form_factors(
    t: Transition,
    ks: &[[f64; 3]],
    params: &AtomParameters,
) -> Result<Vec<FormFactorRecord>, CliError> {
    ks.iter()
        .map(|k| {
            let kv = Vector3::new(k[0], k[1], k[2]);
            let f = form_factor(t.a, t.b, &kv, params)?;
            let total: f64 = f.iter().map(|c| c.norm_sqr()).sum();
            let transverse = match kv.try_normalize(0.0) {
                Some(n) => total - (f.x * n.x + f.y * n.y + f.z * n.z).norm_sqr(),
                None => total,
            };
            Ok(FormFactorRecord {
                transition: t.to_string(),
                kx: k[0],
                ky: k[1],
                kz: k[2],
                fx_re: f.x.re,
                fx_im: f.x.im,
                fy_re: f.y.re,
                fy_im: f.y.im,
                fz_re: f.z.re,
                fz_im: f.z.im,
                transverse,
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
pub struct BoostCheckRecord {
    #[serde(rename = "T")]
    pub t: f64,
    pub v: f64,
    pub rest: f64,
    pub boosted: f64,
    pub mc_sigma: f64,
    pub z: f64,
    pub effective_sample_size: f64,
    pub pointwise_points: usize,
    pub pointwise_max_relative: f64,
    pub pass: bool,
}

pub struct BoostCheckRequest {
    pub t: f64,
    pub v: f64,
    pub samples: u64,
    pub seed: u64,
    pub points: usize,
    pub max_sigmas: f64,
    pub pointwise_tolerance: f64,
}

/// Compares the boosted Monte Carlo estimate with the rest-frame value and
/// checks the boosted integrand against the rest-frame one at random points.
pub fn boost_check(
    req: &BoostCheckRequest,
    params: &AtomParameters,
    units: &UnitSystem,
) -> Result<Vec<BoostCheckRecord>, CliError> {
    let boost = BoostParameters::along_z(req.v)?;
    let rest = vep_rest_closed(req.t, params, units)?.probability;
    let mc = vep_boosted(
        req.t,
        &boost,
        params,
        units,
        &MonteCarloSpec::new(req.samples, req.seed),
    )?;
    let z = (mc.probability - rest) / mc.error_estimate;

    let setup = ExcitationSetup::new(req.t, params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(req.seed);
    let mut worst: f64 = 0.0;
    for _ in 0..req.points {
        // photon momenta where the switching transform is not negligible
        let k = random_unit(&mut rng) * 10f64.powf(rng.gen_range(-1.0..1.5)) / req.t;
        let mut event = || {
            let xi = random_unit(&mut rng) * rng.gen_range(0.0..6.0) * params.a0;
            boost.to_lab(rng.gen_range(-2.0..2.0) * req.t, &xi)
        };
        let (lab1, lab2) = (event(), event());
        let e1 = boost.to_moving(lab1.0, &lab1.1);
        let e2 = boost.to_moving(lab2.0, &lab2.1);
        let (w_rest, k_rest) = boost.transform_wavevector(&k);
        let b = setup.boosted_integrand(&k, &lab1, &lab2, &boost)? * (k.norm() / w_rest);
        let r = setup.rest_integrand(&k_rest, &e1, &e2)?;
        if r.norm() > 0.0 {
            worst = worst.max((b - r).norm() / r.norm());
        }
    }
    Ok(vec![BoostCheckRecord {
        t: req.t,
        v: req.v,
        rest,
        boosted: mc.probability,
        mc_sigma: mc.error_estimate,
        z,
        effective_sample_size: mc.effective_sample_size.unwrap_or(0.0),
        pointwise_points: req.points,
        pointwise_max_relative: worst,
        pass: z.abs() <= req.max_sigmas && worst <= req.pointwise_tolerance,
    }])
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).sqrt();
    Vector3::new(s * phi.cos(), s * phi.sin(), z)
}
