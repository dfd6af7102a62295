//! Reference quadrature used by the integration tests. Deliberately separate
//! from the library's own rules so that oracles do not share code with the
//! implementation under test.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// Composite Gauss–Legendre over `panels` equal panels of `[a, b]`.
pub fn composite(nodes: &[(f64, f64)], a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    let h = (b - a) / panels as f64;
    let mut out = Vec::with_capacity(panels * nodes.len());
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * h;
        for &(x, w) in nodes {
            out.push((mid + 0.5 * h * x, 0.5 * h * w));
        }
    }
    out
}

pub fn integrate<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    panels: usize,
    order: usize,
) -> f64 {
    let rule = composite(&gauss_legendre(order), a, b, panels);
    let mut terms: Vec<f64> = rule.iter().map(|&(x, w)| w * f(x)).collect();
    terms.sort_by(|x, y| x.abs().partial_cmp(&y.abs()).unwrap());
    terms.iter().sum()
}

/// Product grid on the unit sphere: Gauss–Legendre in cos θ, trapezoid in φ.
/// Yields `(unit vector, weight)`.
pub fn sphere_grid(n_theta: usize, n_phi: usize) -> Vec<([f64; 3], f64)> {
    let mut out = Vec::with_capacity(n_theta * n_phi);
    let dphi = 2.0 * PI / n_phi as f64;
    for (z, wz) in gauss_legendre(n_theta) {
        let s = (1.0 - z * z).sqrt();
        for j in 0..n_phi {
            let phi = j as f64 * dphi;
            out.push(([s * phi.cos(), s * phi.sin(), z], wz * dphi));
        }
    }
    out
}
