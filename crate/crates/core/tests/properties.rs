use proptest::prelude::*;

use focklab::carleson::lens_area;
use focklab::classify::{classify_symbolic, SpacePair, Tri};
use focklab::fock::fock_norm;
use focklab::operators::OperatorSpec;
use focklab::quadrature::{classify_partials, ProbeOutcome, QuadSpec};
use focklab::symbols::{c, kernel, Complex, Exponent, ExpPoly, FockParams, Poly};

fn complex(r: f64) -> impl Strategy<Value = Complex> {
    (-r..r, -r..r).prop_map(|(a, b)| c(a, b))
}

fn poly(max_deg: usize, r: f64) -> impl Strategy<Value = Poly> {
    prop::collection::vec(complex(r), 1..=max_deg + 1).prop_map(Poly::new)
}

fn exppoly() -> impl Strategy<Value = ExpPoly> {
    (poly(3, 1.0), poly(2, 0.3)).prop_map(|(p, q)| ExpPoly::new(p, q))
}

fn close(a: Complex, b: Complex, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + b.norm())
}

proptest! {
    #[test]
    fn product_evaluates_pointwise(f in exppoly(), g in exppoly(), z in complex(2.0)) {
        prop_assert!(close(f.multiply(&g).eval(z), f.eval(z) * g.eval(z), 1e-11));
    }

    #[test]
    fn product_rule(f in exppoly(), g in exppoly(), z in complex(2.0)) {
        let lhs = f.multiply(&g).differentiate().eval(z);
        let rhs = f.differentiate().eval(z) * g.eval(z) + f.eval(z) * g.differentiate().eval(z);
        prop_assert!(close(lhs, rhs, 1e-10));
    }

    #[test]
    fn chain_rule(f in exppoly(), r in poly(2, 1.0), z in complex(1.5)) {
        let lhs = f.compose(&r).differentiate().eval(z);
        let rhs = f.differentiate().eval(r.eval(z)) * r.derivative().eval(z);
        prop_assert!(close(lhs, rhs, 1e-10));
    }

    #[test]
    fn normalized_kernels_have_unit_pointwise_weight(w in complex(4.0), z in complex(6.0), alpha in 0.25f64..3.0) {
        let k = kernel(w, alpha, true).unwrap();
        let l = k.log_modulus(z) - 0.5 * alpha * z.norm_sqr();
        prop_assert!(l <= 1e-12);
    }

    #[test]
    fn lens_area_is_bounded_and_monotone(r in 0.1f64..3.0, big in 0.5f64..50.0, s in 0.0f64..60.0, ds in 0.0f64..1.0) {
        let a = lens_area(s, r, big);
        let cap = std::f64::consts::PI * r.min(big).powi(2);
        prop_assert!(a >= 0.0 && a <= cap * (1.0 + 1e-12));
        prop_assert!(lens_area(s + ds, r, big) <= a * (1.0 + 1e-12) + 1e-300);
    }

    #[test]
    fn power_growth_is_divergent(k in 0.5f64..4.0, c0 in -5.0f64..5.0) {
        let radii = [4.0, 8.0, 16.0, 32.0, 64.0];
        let logs: Vec<f64> = radii.iter().map(|r: &f64| c0 + k * r.ln()).collect();
        let ProbeOutcome::Divergent { growth_exponent, .. } = classify_partials(&radii, &logs, 1e-6, None) else {
            return Err(TestCaseError::fail("expected divergence"));
        };
        prop_assert!((growth_exponent - k).abs() < 1e-6);
    }

    #[test]
    fn power_tails_converge(k in 1.0f64..4.0, m in 0.5f64..10.0) {
        let radii = [4.0, 8.0, 16.0, 32.0, 64.0];
        let logs: Vec<f64> = radii.iter().map(|r: &f64| (m * (1.0 - r.powf(-k))).ln()).collect();
        let ProbeOutcome::Convergent { value, error_bound } = classify_partials(&radii, &logs, 1e-6, None) else {
            return Err(TestCaseError::fail("expected convergence"));
        };
        prop_assert!((value - m).abs() <= error_bound.max(1e-9 * m) * 2.0);
    }

    #[test]
    fn compact_implies_bounded(g in poly(5, 1.0), p in 0.5f64..5.0, to_inf in any::<bool>()) {
        let alpha = 1.0;
        let (s, t) = if to_inf { (Exponent::Finite(p), Exponent::Infinite) } else { (Exponent::Infinite, Exponent::Finite(p)) };
        let pair = SpacePair::new(FockParams::new(alpha, s).unwrap(), FockParams::new(alpha, t).unwrap()).unwrap();
        let v = classify_symbolic(&OperatorSpec::vg(ExpPoly::poly(g)), &pair).unwrap();
        prop_assert!(v.compact != Tri::Yes || v.bounded == Tri::Yes);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn norm_is_homogeneous(f in exppoly(), a in complex(3.0), pi in 0usize..3) {
        prop_assume!(a.norm() > 1e-3);
        let p = [Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Infinite][pi];
        let params = FockParams::new(1.0, p).unwrap();
        let spec = QuadSpec::default();
        let n = fock_norm(&f, params, &spec);
        let m = fock_norm(&f.scale(a), params, &spec);
        match (n, m) {
            (Ok(n), Ok(m)) => prop_assert!((m.value - a.norm() * n.value).abs() <= 1e-10 * a.norm() * n.value),
            (Err(_), Err(_)) => {}
            (n, m) => return Err(TestCaseError::fail(format!("{n:?} vs {m:?}"))),
        }
    }
}
