use super::*;
use crate::symbols::{c, ExpPoly, Poly};

fn gaussian() -> EnvelopedIntegrand<'static> {
    EnvelopedIntegrand::from_shape(LogShape::new().gauss(-1.0))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

#[test]
fn gaussian_integral_is_pi() {
    let r = integrate_plane(&gaussian(), &QuadSpec::default()).unwrap();
    assert!(rel(r.value, PI) < 1e-8, "{}", r.value);
    assert!(r.error_bound < 1e-7);
}

#[test]
fn translated_gaussian_is_pi() {
    let w = c(3.0, 4.0);
    let shape = LogShape::new().mod_sq(-1.0, Poly::identity().sub(&Poly::constant(w)));
    let r = integrate_plane(&EnvelopedIntegrand::from_shape(shape), &QuadSpec::default()).unwrap();
    assert!(rel(r.value, PI) < 1e-8, "{}", r.value);
}

#[test]
fn second_moment_matches_radial_closed_form() {
    // 2π∫₀^∞ r³e^{−r²} dr = π
    let shape = LogShape::new().factor(2.0, ExpPoly::poly(Poly::identity())).gauss(-1.0);
    let r = integrate_plane(&EnvelopedIntegrand::from_shape(shape), &QuadSpec::default()).unwrap();
    assert!(rel(r.value, PI) < 1e-8, "{}", r.value);
}

#[test]
fn non_decaying_envelope_is_rejected() {
    let flat = EnvelopedIntegrand::from_shape(LogShape::new());
    assert!(matches!(integrate_plane(&flat, &QuadSpec::default()), Err(FockError::Envelope(_))));
    let none = EnvelopedIntegrand::new(|_| 0.0, None);
    assert!(matches!(integrate_plane(&none, &QuadSpec::default()), Err(FockError::Envelope(_))));
}

#[test]
fn false_envelope_is_caught() {
    let lie = Envelope { log_c: -50.0, beta: 1.0, gamma: 0.0, r0: 1.0 };
    let f = EnvelopedIntegrand::new(|z: Complex| -0.5 * z.norm_sqr(), Some(lie));
    assert!(f.check_envelope().is_err());
    assert!(integrate_plane(&f, &QuadSpec::default()).is_err());
}

#[test]
fn sup_of_gaussian() {
    let s = sup_plane(&gaussian(), &QuadSpec::default(), FarField::Auto).unwrap();
    assert!((s.sup - 1.0).abs() < 1e-12);
    assert!(s.argmax.norm() < 1e-6);
    assert!(s.attained_inside);
}

#[test]
fn sup_at_infinity_with_limit() {
    // 2|z|/(1+|z|)
    let f = EnvelopedIntegrand::from_shape(
        LogShape::new()
            .with_const(2f64.ln())
            .factor(1.0, ExpPoly::poly(Poly::identity()))
            .damping(1.0, Poly::identity()),
    );
    let s = sup_plane(&f, &QuadSpec::default(), FarField::Limit(2.0)).unwrap();
    assert_eq!(s.sup, 2.0);
    assert!(!s.attained_inside);
    let auto = sup_plane(&f, &QuadSpec::default(), FarField::Auto).unwrap();
    assert!((auto.sup - 2.0).abs() < 1e-5);
    assert!(!auto.attained_inside);
}

#[test]
fn sup_of_damped_gaussian_at_origin() {
    // (1/(1+|z|))·e^{−(3/8)|z|²}
    let f = EnvelopedIntegrand::from_shape(LogShape::new().damping(1.0, Poly::identity()).gauss(-0.375));
    let s = sup_plane(&f, &QuadSpec::default(), FarField::Auto).unwrap();
    assert!((s.sup - 1.0).abs() < 1e-12);
    assert!(s.argmax.norm() < 1e-6);
    assert!(s.attained_inside);
    // grid oracle
    let mut best: f64 = 0.0;
    for i in -100..=100 {
        for j in -100..=100 {
            best = best.max(f.eval(c(0.05 * i as f64, 0.05 * j as f64)));
        }
    }
    assert!(s.sup >= best);
}

#[test]
fn sup_off_centre_peak() {
    let w = c(-7.3, 11.1);
    let f = EnvelopedIntegrand::from_shape(
        LogShape::new().with_const(0.7).mod_sq(-0.5, Poly::identity().sub(&Poly::constant(w))),
    );
    let s = sup_plane(&f, &QuadSpec::default(), FarField::Auto).unwrap();
    assert!((s.log_sup - 0.7).abs() < 1e-10);
    assert!((s.argmax - w).norm() < 1e-4);
}

#[test]
fn unbounded_growth_is_signalled() {
    let f = EnvelopedIntegrand::from_shape(LogShape::new().factor(1.0, ExpPoly::poly(Poly::identity())));
    assert!(matches!(sup_plane(&f, &QuadSpec::default(), FarField::Auto), Err(FockError::Unbounded { .. })));
    let g = EnvelopedIntegrand::from_shape(LogShape::new().gauss(0.1));
    assert!(matches!(sup_plane(&g, &QuadSpec::default(), FarField::Auto), Err(FockError::Unbounded { .. })));
}

#[test]
fn probe_gaussian_converges_to_pi() {
    match divergence_probe(&gaussian(), &[2.0, 4.0, 8.0], &QuadSpec::default()).unwrap() {
        ProbeOutcome::Convergent { value, .. } => assert!(rel(value, PI) < 1e-8),
        other => panic!("{other:?}"),
    }
}

#[test]
fn probe_constant_diverges_quadratically() {
    let one = EnvelopedIntegrand::from_shape(LogShape::new());
    match divergence_probe(&one, &[2.0, 4.0, 8.0], &QuadSpec::default()).unwrap() {
        ProbeOutcome::Divergent { growth_exponent, logarithmic } => {
            assert!((growth_exponent - 2.0).abs() < 1e-6);
            assert!(!logarithmic);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn probe_borderline_inverse_square_is_logarithmic() {
    let f = EnvelopedIntegrand::from_shape(LogShape::new().damping(2.0, Poly::identity()));
    let radii = [10.0, 1e2, 1e3, 1e4];
    match divergence_probe(&f, &radii, &QuadSpec::default()).unwrap() {
        ProbeOutcome::Divergent { logarithmic, .. } => assert!(logarithmic),
        other => panic!("{other:?}"),
    }
    // partial sums follow the radial closed form 2π(ln(1+R) + 1/(1+R) − 1)
    let tol = DiscTol { rel: 1e-9, abs: 0.0 };
    let sampler = |z: Complex| (f.log_eval(z), [1.0]);
    for r in radii {
        let d = integrate_disc(&sampler, r, 64, tol);
        let exact = 2.0 * PI * ((1.0 + r).ln() + 1.0 / (1.0 + r) - 1.0);
        assert!(rel(d.values[0], exact) < 1e-7, "R={r}: {} vs {exact}", d.values[0]);
    }
}

#[test]
fn probe_inverse_cube_converges() {
    let f = EnvelopedIntegrand::from_shape(LogShape::new().damping(3.0, Poly::identity()));
    match divergence_probe(&f, &[10.0, 1e2, 1e3, 1e4], &QuadSpec::default()).unwrap() {
        // 2π∫ r(1+r)^{-3} dr = π
        ProbeOutcome::Convergent { value, .. } => assert!(rel(value, PI) < 1e-3, "{value}"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn probe_rejects_bad_radii() {
    assert!(divergence_probe(&gaussian(), &[1.0, 2.0], &QuadSpec::default()).is_err());
    assert!(divergence_probe(&gaussian(), &[1.0, 3.0, 2.0], &QuadSpec::default()).is_err());
}

#[test]
fn segment_examples() {
    let z = c(1.0, 1.0);
    let v = integrate_segment(|_| c(1.0, 0.0), c(0.0, 0.0), z, 1e-12).unwrap();
    assert!((v - z).norm() < 1e-14);
    let v = integrate_segment(|w| w * 2.0, c(0.0, 0.0), c(2.0, 0.0), 1e-12).unwrap();
    assert!((v - c(4.0, 0.0)).norm() < 1e-13);
    let v = integrate_segment(|w| w.exp(), c(0.0, 0.0), c(1.0, 0.0), 1e-12).unwrap();
    assert!((v.re - (1f64.exp() - 1.0)).abs() < 1e-13 && v.im.abs() < 1e-15);
}

#[test]
fn plane_integral_is_deterministic() {
    let shape = LogShape::new()
        .factor(1.5, ExpPoly::poly(Poly::from_real(&[1.0, -0.5, 0.25])))
        .gauss(-0.8);
    let f = EnvelopedIntegrand::from_shape(shape);
    let a = integrate_plane(&f, &QuadSpec::default()).unwrap();
    let b = integrate_plane(&f, &QuadSpec::default()).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
    assert_eq!(a.error_bound.to_bits(), b.error_bound.to_bits());
}
