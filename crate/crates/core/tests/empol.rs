use approx::assert_relative_eq;
use multipolar::empol::{
    alpha_coefficient, boost_matrix_m, boost_matrix_m_general, epsilon_contract,
    polarization_basis, polarization_sum, transverse_projector, BoostParameters, FieldBoost,
    WaveVector,
};
use multipolar::{AtomParameters, Error};
use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params() -> AtomParameters {
    AtomParameters::standard_hydrogen()
}

fn random_unit(rng: &mut ChaCha8Rng) -> Vector3<f64> {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let phi: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).sqrt();
    Vector3::new(s * phi.cos(), s * phi.sin(), z)
}

/// A wavevector with magnitude spread over many decades and a COM momentum
/// below the non-relativistic bound.
fn random_case(rng: &mut ChaCha8Rng, p: &AtomParameters) -> (WaveVector, Vector3<f64>) {
    let k = random_unit(rng) * 10f64.powf(rng.gen_range(-2.0..7.0));
    let pm = random_unit(rng) * p.mass * rng.gen_range(0.0..0.29);
    (WaveVector::new(k).unwrap(), pm)
}

fn vec3() -> impl Strategy<Value = Vector3<f64>> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64)
        .prop_filter("non-zero", |(x, y, z)| x * x + y * y + z * z > 1e-6)
        .prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

#[test]
fn basis_for_z_axis() {
    let b = polarization_basis(&WaveVector::new(Vector3::new(0.0, 0.0, 2.5)).unwrap());
    assert_eq!(b.eps1, Vector3::x());
    assert_eq!(b.eps2, Vector3::y());
}

#[test]
fn zero_wavevector_is_rejected() {
    assert!(matches!(
        WaveVector::new(Vector3::zeros()),
        Err(Error::Domain(_))
    ));
}

#[test]
fn alpha_reduces_to_polarization_for_static_atom() {
    let p = params();
    let k = WaveVector::new(Vector3::new(3e-12, -1e-12, 2e-12)).unwrap();
    for s in 0..2 {
        let a = alpha_coefficient(&k, s, &Vector3::zeros(), &p).unwrap();
        let eps = polarization_basis(&k).get(s).unwrap();
        assert!((a - eps).amax() < 1e-15);
    }
}

#[test]
fn alpha_recoil_factor_at_rest() {
    let p = params();
    let k = WaveVector::new(Vector3::new(2e3, 5e3, -1e3)).unwrap();
    for s in 0..2 {
        let a = alpha_coefficient(&k, s, &Vector3::zeros(), &p).unwrap();
        let eps = polarization_basis(&k).get(s).unwrap();
        let want = eps * (1.0 + k.magnitude() / (2.0 * p.mass));
        assert!((a - want).amax() < 1e-15);
    }
    assert!(alpha_coefficient(&k, 2, &Vector3::zeros(), &p).is_err());
}

#[test]
fn alpha_cross_product_form() {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let (k, pm) = random_case(&mut rng, &p);
        let e = k.unit();
        for s in 0..2 {
            let eps = polarization_basis(&k).get(s).unwrap();
            let q = pm - k.vector() * 0.5;
            let want = eps - e.cross(&eps).cross(&q) / p.mass;
            let got = alpha_coefficient(&k, s, &pm, &p).unwrap();
            assert!((got - want).amax() <= 1e-14, "{:e}", (got - want).amax());
        }
    }
}

#[test]
fn polarization_sum_matches_direct_summation() {
    let p = params();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let (k, pm) = random_case(&mut rng, &p);
        let direct: Matrix3<f64> = (0..2)
            .map(|s| {
                let a = alpha_coefficient(&k, s, &pm, &p).unwrap();
                a * a.transpose()
            })
            .sum();
        let closed = polarization_sum(&k, &pm, &p).unwrap();
        worst = worst.max((closed.t - direct).amax());
        assert!(closed.max_asymmetry() == 0.0);
    }
    assert!(worst <= 1e-13, "max-abs deviation {worst:e}");
}

#[test]
fn polarization_sum_at_rest() {
    let p = params();
    let k = WaveVector::new(Vector3::new(1e5, 2e5, 3e5)).unwrap();
    let s = polarization_sum(&k, &Vector3::zeros(), &p).unwrap();
    let f = 1.0 + k.magnitude() / (2.0 * p.mass);
    let want = transverse_projector(&k).t * (f * f);
    assert!((s.t - want).amax() < 1e-15);
}

#[test]
fn polarization_sum_infinite_mass_limit() {
    let heavy = AtomParameters::new(2.68e-4, 1e30, 5e5, 10.2, 0.99).unwrap();
    let k = WaveVector::new(Vector3::new(4.0, -1.0, 7.0)).unwrap();
    let pm = Vector3::new(1e3, 2e3, -5e2);
    let s = polarization_sum(&k, &pm, &heavy).unwrap();
    assert!((s.t - transverse_projector(&k).t).amax() < 1e-15);
}

#[test]
fn non_relativistic_guard() {
    let p = params();
    let k = WaveVector::new(Vector3::new(1.0, 0.0, 0.0)).unwrap();
    let fast = Vector3::new(0.0, 0.31 * p.mass, 0.0);
    let err = polarization_sum(&k, &fast, &p).unwrap_err();
    assert!(err.to_string().contains("non-relativistic"), "{err}");
    assert!(alpha_coefficient(&k, 0, &fast, &p).is_err());
}

#[test]
fn projector_for_z_axis() {
    let t = transverse_projector(&WaveVector::new(Vector3::new(0.0, 0.0, -4.0)).unwrap()).t;
    assert_eq!(t, Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 0.0)));
}

#[test]
fn boost_matrix_at_rest_is_projector() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let still = BoostParameters::along_z(0.0).unwrap();
    for _ in 0..100 {
        let k = WaveVector::new(random_unit(&mut rng) * 3.0).unwrap();
        let m = boost_matrix_m(&k, &still).unwrap();
        assert!((m - transverse_projector(&k).t).amax() < 1e-15);
    }
}

#[test]
fn boost_matrix_for_collinear_wavevector() {
    let boost = BoostParameters::along_z(0.5).unwrap();
    let k = WaveVector::new(Vector3::new(0.0, 0.0, 1.7)).unwrap();
    let m = boost_matrix_m(&k, &boost).unwrap();
    let g2 = 1.0 / (1.0 - 0.25);
    let d = g2 * 0.25;
    let want = Matrix3::from_diagonal(&Vector3::new(d, d, 0.0));
    assert!((m - want).amax() < 1e-15);
}

#[test]
fn boost_matrix_requires_z_direction() {
    let k = WaveVector::new(Vector3::new(1.0, 0.0, 0.0)).unwrap();
    let oblique = BoostParameters::new(0.3, Vector3::new(1.0, 1.0, 0.0)).unwrap();
    assert!(matches!(
        boost_matrix_m(&k, &oblique),
        Err(Error::Domain(_))
    ));
    assert!(boost_matrix_m_general(&k, &oblique).is_ok());
}

#[test]
fn boost_parameter_validation() {
    assert!(BoostParameters::along_z(1.0).is_err());
    assert!(BoostParameters::along_z(-0.1).is_err());
    assert!(BoostParameters::new(0.2, Vector3::zeros()).is_err());
    let b = BoostParameters::from_rapidity(0.5, Vector3::new(0.0, 0.0, 3.0)).unwrap();
    assert_relative_eq!(b.rapidity(), 0.5, max_relative = 1e-14);
    assert_relative_eq!(b.gamma(), 0.5f64.cosh(), max_relative = 1e-14);
}

/// The polarization structure of the boosted electric field, built from the
/// lab-frame field kernels of a single plane-wave mode: `K_EE = K_BB = δ − ee`
/// and the cross terms `Σ_s ε_s ⊗ (e × ε_s) = [ε^{ijl} e_l]`.
fn boosted_mode_kernel(k: &WaveVector, boost: &BoostParameters) -> Matrix3<f64> {
    let proj = transverse_projector(k).t.map(Complex64::from);
    let cross = epsilon_contract(k.unit()).map(Complex64::from);
    let out = FieldBoost::new(boost).combine(&proj, &cross, &(-cross), &proj);
    assert!(out.map(|c| c.im.abs()).amax() == 0.0);
    out.map(|c| c.re)
}

#[test]
fn mode_kernel_cross_terms_match_basis_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..100 {
        let k = WaveVector::new(random_unit(&mut rng)).unwrap();
        let b = polarization_basis(&k);
        let e = k.unit();
        let sum = b.eps1 * e.cross(&b.eps1).transpose() + b.eps2 * e.cross(&b.eps2).transpose();
        assert!((sum - epsilon_contract(e)).amax() < 1e-15);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn basis_is_right_handed_and_complete(k in vec3(), scale in -3.0..3.0f64) {
        let k = WaveVector::new(k * 10f64.powf(scale)).unwrap();
        let b = polarization_basis(&k);
        let e = k.unit();
        prop_assert!((e.norm() - 1.0).abs() < 1e-15);
        prop_assert!((b.eps1.norm() - 1.0).abs() < 1e-15 && (b.eps2.norm() - 1.0).abs() < 1e-15);
        prop_assert!(b.eps1.dot(e).abs() < 1e-15 && b.eps2.dot(e).abs() < 1e-15 && b.eps1.dot(&b.eps2).abs() < 1e-15);
        prop_assert!((e.cross(&b.eps1) - b.eps2).amax() < 1e-15);
        prop_assert!((e.cross(&b.eps2) + b.eps1).amax() < 1e-15);
        let completeness = b.eps1 * b.eps1.transpose() + b.eps2 * b.eps2.transpose();
        prop_assert!((completeness - (Matrix3::identity() - e * e.transpose())).amax() < 1e-14);
    }

    #[test]
    fn projector_algebra(k in vec3()) {
        let k = WaveVector::new(k).unwrap();
        let t = transverse_projector(&k).t;
        prop_assert!((t * t - t).amax() < 1e-15);
        prop_assert!((t.trace() - 2.0).abs() < 1e-15);
        prop_assert!((t * k.vector()).amax() < 1e-15);
        prop_assert!(transverse_projector(&k).max_asymmetry() == 0.0);
    }

    #[test]
    fn polarization_sum_is_basis_independent(
        k in vec3(), kscale in -2.0..6.0f64, pdir in vec3(), pfrac in 0.0..0.29f64, angle in 0.0..std::f64::consts::TAU,
    ) {
        let p = params();
        let k = WaveVector::new(k * 10f64.powf(kscale)).unwrap();
        let pm = pdir.normalize() * pfrac * p.mass;
        let b = polarization_basis(&k);
        let (c, s) = (angle.cos(), angle.sin());
        let rotated = [b.eps1 * c + b.eps2 * s, b.eps2 * c - b.eps1 * s];
        let e = k.unit();
        let q = pm - k.vector() * 0.5;
        let sum: Matrix3<f64> = rotated
            .iter()
            .map(|eps| {
                let a = eps - e.cross(eps).cross(&q) / p.mass;
                a * a.transpose()
            })
            .sum();
        let closed = polarization_sum(&k, &pm, &p).unwrap().t;
        prop_assert!((closed - sum).amax() <= 1e-13);
    }

    #[test]
    fn boost_matrix_matches_boosted_field_kernel(k in vec3(), v in 0.0..0.95f64) {
        let k = WaveVector::new(k).unwrap();
        let boost = BoostParameters::along_z(v).unwrap();
        let m = boost_matrix_m(&k, &boost).unwrap();
        prop_assert!((m - boosted_mode_kernel(&k, &boost)).amax() <= 1e-12 * boost.gamma().powi(2));
        prop_assert!((m - m.transpose()).amax() == 0.0);
    }

    #[test]
    fn boost_matrix_is_doppler_scaled_projector(k in vec3(), v in 0.0..0.95f64) {
        // a boosted plane wave is again transverse, with amplitude scaled by ω'/ω
        let k = WaveVector::new(k).unwrap();
        let boost = BoostParameters::along_z(v).unwrap();
        let (w, kp) = boost.transform_wavevector(k.vector());
        let want = transverse_projector(&WaveVector::new(kp).unwrap()).t * (w / k.magnitude()).powi(2);
        let m = boost_matrix_m(&k, &boost).unwrap();
        prop_assert!((m - want).amax() <= 1e-12 * boost.gamma().powi(2));
    }

    #[test]
    fn general_direction_matches_field_kernel(k in vec3(), dir in vec3(), v in 0.0..0.9f64) {
        let k = WaveVector::new(k).unwrap();
        let boost = BoostParameters::new(v, dir).unwrap();
        let m = boost_matrix_m_general(&k, &boost).unwrap();
        prop_assert!((m - boosted_mode_kernel(&k, &boost)).amax() <= 1e-12 * boost.gamma().powi(2));
    }

    #[test]
    fn coordinate_maps_are_inverse_and_preserve_interval(
        t in -5.0..5.0f64, x in vec3(), dir in vec3(), v in 0.0..0.99f64,
    ) {
        let boost = BoostParameters::new(v, dir).unwrap();
        let (tau, xi) = boost.to_moving(t, &x);
        let (t2, x2) = boost.to_lab(tau, &xi);
        let g2 = boost.gamma().powi(2);
        prop_assert!((t2 - t).abs() <= 1e-13 * g2 * (1.0 + t.abs()));
        prop_assert!((x2 - x).amax() <= 1e-13 * g2 * (1.0 + t.abs()));
        let s_lab = t * t - x.norm_squared();
        let s_mov = tau * tau - xi.norm_squared();
        prop_assert!((s_lab - s_mov).abs() <= 1e-12 * g2 * (t * t + x.norm_squared()));
    }

    #[test]
    fn transformed_wavevector_stays_null(k in vec3(), dir in vec3(), v in 0.0..0.99f64) {
        let boost = BoostParameters::new(v, dir).unwrap();
        let (w, kp) = boost.transform_wavevector(&k);
        prop_assert!(w > 0.0);
        prop_assert!((w - kp.norm()).abs() <= 1e-13 * boost.gamma() * k.norm());
    }
}
