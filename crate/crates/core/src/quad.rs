//! Numerical backbone: adaptive Gauss–Kronrod integration, Gauss–Legendre
//! rules, a product rule on the unit sphere, Gaussian-regularised delta
//! integrals, Richardson extrapolation and seeded Monte Carlo.
//!
//! Every reduction over nodes, intervals or sample chunks is summed in a
//! fixed canonical order so results do not depend on how work was split.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;
use std::fmt::Debug;

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl QuadratureResult {
    /// Turns a non-converged result into an error carrying its diagnostics.
    pub fn require(self, context: &str, tol: Tolerance) -> Result<f64> {
        if self.converged {
            Ok(self.value)
        } else {
            Err(Error::NotConverged {
                context: context.to_string(),
                value: self.value,
                error_estimate: self.error_estimate,
                tolerance: tol.bound(self.value),
                evaluations: self.evaluations,
            })
        }
    }
}

/// Mixed absolute/relative tolerance: accept when `err <= max(abs, rel*|value|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    pub fn relative(rel: f64) -> Self {
        Tolerance { abs: 0.0, rel }
    }

    pub fn absolute(abs: f64) -> Self {
        Tolerance { abs, rel: 0.0 }
    }

    pub fn bound(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::new(1e-14, 1e-12)
    }
}

/// Integration domain. Half-infinite domains are mapped onto `[0, 1)` by
/// `x = start + scale * t / (1 - t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Interval {
    Finite { a: f64, b: f64 },
    SemiInfinite { start: f64, scale: f64 },
}

impl Interval {
    pub fn finite(a: f64, b: f64) -> Self {
        Interval::Finite { a, b }
    }

    pub fn semi_infinite(start: f64, scale: f64) -> Self {
        Interval::SemiInfinite { start, scale }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub max_subdivisions: usize,
    /// Number of equal pieces the domain is cut into before adapting.
    pub initial_segments: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        AdaptiveOptions {
            max_subdivisions: 4000,
            initial_segments: 1,
        }
    }
}

// Gauss–Kronrod 7/15 abscissae and weights (QUADPACK qk15).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_5,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_48,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_19,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_89,
    0.209_482_141_084_727_82,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    // Largest error first; ties broken by position so the heap order is total.
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_g = fc * WG[3];
    let mut res_k = fc * WGK[7];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment { a, b, value, error }
}

/// Sums in a balanced binary tree; the grouping depends only on the length.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        2 => values[0] + values[1],
        n => {
            let (lo, hi) = values.split_at(n / 2);
            pairwise_sum(lo) + pairwise_sum(hi)
        }
    }
}

/// Adaptive integration of `f` over `interval`.
pub fn integrate_1d<F: FnMut(f64) -> f64>(
    f: F,
    interval: Interval,
    tol: Tolerance,
) -> QuadratureResult {
    integrate_1d_with(f, interval, tol, &AdaptiveOptions::default())
}

pub fn integrate_1d_with<F: FnMut(f64) -> f64>(
    mut f: F,
    interval: Interval,
    tol: Tolerance,
    options: &AdaptiveOptions,
) -> QuadratureResult {
    match interval {
        Interval::Finite { a, b } => adapt(&mut f, a, b, tol, options),
        Interval::SemiInfinite { start, scale } => {
            let mut mapped = |t: f64| {
                let s = 1.0 - t;
                f(start + scale * t / s) * scale / (s * s)
            };
            adapt(&mut mapped, 0.0, 1.0, tol, options)
        }
    }
}

fn adapt<F: FnMut(f64) -> f64>(
    f: &mut F,
    a: f64,
    b: f64,
    tol: Tolerance,
    options: &AdaptiveOptions,
) -> QuadratureResult {
    let pieces = options.initial_segments.max(1);
    let mut heap = BinaryHeap::with_capacity(options.max_subdivisions + pieces + 2);
    let mut evaluations = 0;
    for i in 0..pieces {
        let lo = a + (b - a) * i as f64 / pieces as f64;
        let hi = if i + 1 == pieces {
            b
        } else {
            a + (b - a) * (i + 1) as f64 / pieces as f64
        };
        heap.push(gk15(f, lo, hi));
        evaluations += 15;
    }

    let totals = |heap: &BinaryHeap<Segment>| {
        let mut segs: Vec<Segment> = heap.iter().copied().collect();
        segs.sort_by(|x, y| x.a.total_cmp(&y.a));
        let values: Vec<f64> = segs.iter().map(|s| s.value).collect();
        let errors: Vec<f64> = segs.iter().map(|s| s.error).collect();
        (pairwise_sum(&values), pairwise_sum(&errors))
    };

    let mut converged = false;
    let (mut value, mut error) = totals(&heap);
    loop {
        if !(value.is_finite() && error.is_finite()) {
            break;
        }
        if error <= tol.bound(value) {
            converged = true;
            break;
        }
        if heap.len() >= options.max_subdivisions {
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) {
            heap.push(worst);
            break;
        }
        heap.push(gk15(f, worst.a, mid));
        heap.push(gk15(f, mid, worst.b));
        evaluations += 30;
        let t = totals(&heap);
        value = t.0;
        error = t.1;
    }
    QuadratureResult {
        value,
        error_estimate: error,
        evaluations,
        converged,
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = ((i as f64 + 0.75) / (n as f64 + 0.5) * PI).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Fixed-order integral over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(mid + half * x))
            .collect();
        half * pairwise_sum(&terms)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Gauss–Legendre in cos θ times the trapezoid rule in φ. A rule of order
/// `p` has `p` polar and `2p` azimuthal nodes and integrates spherical
/// polynomials of degree up to `2p - 1` exactly.
#[derive(Debug, Clone)]
pub struct SphereRule {
    order: usize,
    points: Vec<(Vector3<f64>, f64)>,
}

impl SphereRule {
    pub const MIN_ORDER: usize = 8;

    pub fn new(order: usize) -> Result<Self> {
        if order < Self::MIN_ORDER {
            return Err(Error::domain(format!(
                "sphere rule order must be at least {}, got {order}",
                Self::MIN_ORDER
            )));
        }
        let gl = GaussLegendre::new(order);
        let n_phi = 2 * order;
        let dphi = 2.0 * PI / n_phi as f64;
        let mut points = Vec::with_capacity(order * n_phi);
        for (z, wz) in gl.nodes.iter().zip(&gl.weights) {
            let s = (1.0 - z * z).max(0.0).sqrt();
            for j in 0..n_phi {
                let phi = (j as f64 + 0.5) * dphi;
                points.push((Vector3::new(s * phi.cos(), s * phi.sin(), *z), wz * dphi));
            }
        }
        Ok(SphereRule { order, points })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Unit vectors and weights; the weights sum to 4π.
    pub fn points(&self) -> &[(Vector3<f64>, f64)] {
        &self.points
    }

    pub fn integrate<F: FnMut(&Vector3<f64>) -> f64>(&self, mut f: F) -> QuadratureResult {
        let terms: Vec<f64> = self.points.iter().map(|(n, w)| w * f(n)).collect();
        QuadratureResult {
            value: pairwise_sum(&terms),
            error_estimate: 0.0,
            evaluations: terms.len(),
            converged: true,
        }
    }
}

pub fn integrate_sphere<F: FnMut(&Vector3<f64>) -> f64>(
    f: F,
    order: usize,
) -> Result<QuadratureResult> {
    Ok(SphereRule::new(order)?.integrate(f))
}

/// Integrates `f(x) · N(g(x); width)` over `[lo, hi]`, where `N` is the
/// normalised Gaussian, i.e. a smeared version of `∫ f δ(g)`. Roots of `g`
/// are bracketed on a uniform scan; if `g` never changes sign the result
/// is zero.
pub fn delta_regularized<F, G>(
    mut f: F,
    mut argfun: G,
    width: f64,
    lo: f64,
    hi: f64,
    tol: Tolerance,
) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> f64,
    G: FnMut(f64) -> f64,
{
    if !(width > 0.0) || !(hi > lo) {
        return Err(Error::domain(
            "delta_regularized needs width > 0 and hi > lo",
        ));
    }
    const SCAN: usize = 2048;
    const HALF_WINDOW: f64 = 40.0;
    let mut roots = Vec::new();
    let step = (hi - lo) / SCAN as f64;
    let mut x0 = lo;
    let mut g0 = argfun(x0);
    for i in 1..=SCAN {
        let x1 = if i == SCAN { hi } else { lo + step * i as f64 };
        let g1 = argfun(x1);
        if g0 == 0.0 {
            roots.push(x0);
        } else if g0.signum() != g1.signum() && g1 != 0.0 {
            let (mut a, mut b, mut ga) = (x0, x1, g0);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                let gm = argfun(m);
                if gm.signum() == ga.signum() {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
            }
            roots.push(0.5 * (a + b));
        }
        x0 = x1;
        g0 = g1;
    }
    if g0 == 0.0 {
        roots.push(hi);
    }

    let norm = 1.0 / (width * (2.0 * PI).sqrt());
    let mut total = QuadratureResult {
        value: 0.0,
        error_estimate: 0.0,
        evaluations: 0,
        converged: true,
    };
    let mut parts = Vec::new();
    for r in roots {
        let h = 1e-6 * step.max(r.abs() * 1e-9);
        let slope = (argfun(r + h) - argfun(r - h)) / (2.0 * h);
        if slope == 0.0 || !slope.is_finite() {
            return Err(Error::Numerical(format!(
                "delta argument is not monotone at its root {r:e}"
            )));
        }
        let half = HALF_WINDOW * width / slope.abs();
        let a = (r - half).max(lo);
        let b = (r + half).min(hi);
        let integrand = |x: f64| {
            let g = argfun(x) / width;
            f(x) * norm * (-0.5 * g * g).exp()
        };
        // split at the root so the peak sits on a panel boundary
        let mut sub = Vec::new();
        if r > a {
            sub.push((a, r));
        }
        if b > r {
            sub.push((r, b));
        }
        // `argfun` and `f` are FnMut, so the closure is rebuilt per piece
        let mut integrand = integrand;
        for (x, y) in sub {
            let piece = integrate_1d_with(
                &mut integrand,
                Interval::finite(x, y),
                tol,
                &AdaptiveOptions {
                    max_subdivisions: 4000,
                    initial_segments: 8,
                },
            );
            total.error_estimate += piece.error_estimate;
            total.evaluations += piece.evaluations;
            total.converged &= piece.converged;
            parts.push(piece.value);
        }
    }
    total.value = pairwise_sum(&parts);
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extrapolation {
    pub value: f64,
    pub error_estimate: f64,
}

/// Polynomial (Neville) extrapolation of `(h, value)` pairs to `h = 0`.
///
/// Requires at least three entries on a geometric `h` sequence. The raw
/// differences between consecutive values must shrink; otherwise the
/// sequence is not in its asymptotic regime and the extrapolation is
/// rejected.
pub fn richardson(values: &[(f64, f64)]) -> Result<Extrapolation> {
    let n = values.len();
    if n < 3 {
        return Err(Error::domain(
            "richardson needs at least three (h, value) pairs",
        ));
    }
    if values
        .iter()
        .any(|(h, v)| !(h.is_finite() && v.is_finite()) || *h <= 0.0)
    {
        return Err(Error::domain(
            "richardson needs finite values and positive step sizes",
        ));
    }
    let ratio = values[1].0 / values[0].0;
    for w in values.windows(2) {
        let r = w[1].0 / w[0].0;
        if (r - ratio).abs() > 1e-8 * ratio.abs() || (r - 1.0).abs() < 1e-12 {
            return Err(Error::domain("richardson needs a geometric step sequence"));
        }
    }
    let scale = values.iter().map(|(_, v)| v.abs()).fold(0.0, f64::max);
    let floor = 64.0 * f64::EPSILON * scale;
    let diffs: Vec<f64> = values.windows(2).map(|w| (w[1].1 - w[0].1).abs()).collect();
    for w in diffs.windows(2) {
        if w[1] > w[0] && w[1] > floor {
            return Err(Error::Numerical(format!(
                "richardson: non-monotone convergence (differences {:e} then {:e})",
                w[0], w[1]
            )));
        }
    }
    let neville = |pts: &[(f64, f64)]| {
        let mut p: Vec<f64> = pts.iter().map(|x| x.1).collect();
        let m = pts.len();
        for level in 1..m {
            for i in 0..m - level {
                let hi = pts[i].0;
                let hj = pts[i + level].0;
                p[i] = p[i + 1] + hj * (p[i + 1] - p[i]) / (hi - hj);
            }
        }
        p[0]
    };
    let value = neville(values);
    let previous = neville(&values[1..]);
    Ok(Extrapolation {
        value,
        error_estimate: (value - previous).abs(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonteCarloSpec {
    pub samples: u64,
    pub seed: u64,
    /// Number of independent random sub-streams the samples are split
    /// into. Fixed per run, so results are independent of thread count.
    pub stratification: Option<u32>,
}

impl MonteCarloSpec {
    pub const DEFAULT_STREAMS: u32 = 64;
    /// Minimum sample count for an acceptance-grade run.
    pub const ACCEPTANCE_MIN_SAMPLES: u64 = 1000;

    pub fn new(samples: u64, seed: u64) -> Self {
        MonteCarloSpec {
            samples,
            seed,
            stratification: None,
        }
    }

    pub fn streams(&self) -> u32 {
        self.stratification.unwrap_or(Self::DEFAULT_STREAMS).max(1)
    }
}

/// A normalised proposal density for importance sampling.
pub trait ImportanceSampler: Sync {
    type Point: Debug;

    /// Draws a point and returns it with its proposal density.
    fn draw(&self, rng: &mut ChaCha8Rng) -> (Self::Point, f64);
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub standard_error: f64,
    pub samples: u64,
    /// `(Σ|w|)² / Σw²` over the per-sample estimator values.
    pub effective_sample_size: f64,
}

impl From<MonteCarloEstimate> for QuadratureResult {
    fn from(m: MonteCarloEstimate) -> Self {
        QuadratureResult {
            value: m.value,
            error_estimate: m.standard_error,
            evaluations: m.samples as usize,
            converged: true,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
    sum_abs: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
        self.sum_abs += x.abs();
        self.sum_sq += x * x;
    }

    fn merge(a: Moments, b: Moments) -> Moments {
        if a.n == 0.0 {
            return b;
        }
        if b.n == 0.0 {
            return a;
        }
        let n = a.n + b.n;
        let d = b.mean - a.mean;
        Moments {
            n,
            mean: a.mean + d * b.n / n,
            m2: a.m2 + b.m2 + d * d * a.n * b.n / n,
            sum_abs: a.sum_abs + b.sum_abs,
            sum_sq: a.sum_sq + b.sum_sq,
        }
    }

    fn merge_all(parts: &[Moments]) -> Moments {
        match parts.len() {
            0 => Moments::default(),
            1 => parts[0],
            n => {
                let (lo, hi) = parts.split_at(n / 2);
                Moments::merge(Self::merge_all(lo), Self::merge_all(hi))
            }
        }
    }
}

/// Importance-sampled estimate of `∫ f`, i.e. the mean of `f(x)/q(x)` over
/// draws from the sampler.
pub fn mc_integrate<S, F>(f: F, sampler: &S, spec: &MonteCarloSpec) -> Result<QuadratureResult>
where
    S: ImportanceSampler,
    F: Fn(&S::Point) -> f64 + Sync,
{
    mc_integrate_detailed(f, sampler, spec).map(Into::into)
}

pub fn mc_integrate_detailed<S, F>(
    f: F,
    sampler: &S,
    spec: &MonteCarloSpec,
) -> Result<MonteCarloEstimate>
where
    S: ImportanceSampler,
    F: Fn(&S::Point) -> f64 + Sync,
{
    if spec.samples < 2 {
        return Err(Error::domain("Monte Carlo needs at least two samples"));
    }
    let streams = spec.streams() as u64;
    let base = spec.samples / streams;
    let extra = spec.samples % streams;
    let parts: Vec<Result<Moments>> = (0..streams)
        .into_par_iter()
        .map(|stream| {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(stream);
            let count = base + u64::from(stream < extra);
            let mut m = Moments::default();
            for _ in 0..count {
                let (x, q) = sampler.draw(&mut rng);
                let v = f(&x) / q;
                if !v.is_finite() {
                    return Err(Error::NonFiniteSample {
                        coordinates: format!("{x:?} (density {q:e})"),
                    });
                }
                m.push(v);
            }
            Ok(m)
        })
        .collect();
    let parts = parts.into_iter().collect::<Result<Vec<_>>>()?;
    let total = Moments::merge_all(&parts);
    let variance = if total.n > 1.0 {
        total.m2 / (total.n - 1.0)
    } else {
        0.0
    };
    let ess = if total.sum_sq > 0.0 {
        total.sum_abs * total.sum_abs / total.sum_sq
    } else {
        total.n
    };
    Ok(MonteCarloEstimate {
        value: total.mean,
        standard_error: (variance / total.n).sqrt(),
        samples: spec.samples,
        effective_sample_size: ess,
    })
}
