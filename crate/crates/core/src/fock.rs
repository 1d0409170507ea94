//! Weighted Fock-space norms, inner products and the derivative
//! characterizations of the norm.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{FockError, Result};
use crate::quadrature::{integrate_enveloped, integrate_plane, sup_plane, EnvelopedIntegrand, FarField, LogShape, QuadSpec};
use crate::symbols::{Complex, Exponent, ExpPoly, FockParams, Poly};

/// Relative slack used by [`pointwise_bound_check`].
pub const POINTWISE_TOL: f64 = 1e-8;

/// `‖f‖_{(p,α)}` with its numerical error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormReport {
    pub value: f64,
    pub error_bound: f64,
    pub params: FockParams,
}

fn not_in_space(e: FockError) -> FockError {
    match e {
        FockError::Envelope(_) | FockError::Unbounded { .. } => FockError::NotInSpace,
        other => other,
    }
}

/// `|f|^p e^{−pα|z|²/2}` in the log domain.
pub fn norm_integrand(f: &ExpPoly, alpha: f64, p: f64) -> LogShape {
    LogShape::new().factor(p, f.clone()).gauss(-0.5 * p * alpha)
}

/// `|f′|^p (1+|z|)^{−p} e^{−pα|z|²/2}` in the log domain.
pub fn derivative_integrand(fprime: &ExpPoly, alpha: f64, p: f64) -> LogShape {
    norm_integrand(fprime, alpha, p).damping(p, Poly::identity())
}

/// `‖f‖_{(p,α)}`: `((αp/2π)∫|f|^p e^{−pα|z|²/2} dm)^{1/p}` for finite p,
/// `sup |f| e^{−α|z|²/2}` for p = ∞.
pub fn fock_norm(f: &ExpPoly, params: FockParams, spec: &QuadSpec) -> Result<NormReport> {
    let alpha = params.alpha;
    match params.p {
        Exponent::Finite(p) => {
            let integrand = EnvelopedIntegrand::from_shape(norm_integrand(f, alpha, p));
            let r = integrate_plane(&integrand, spec).map_err(not_in_space)?;
            let c = alpha * p / (2.0 * PI);
            let power = c * r.value;
            let value = power.powf(1.0 / p);
            let error_bound = if power > 0.0 { value / p * (c * r.error_bound) / power } else { (c * r.error_bound).powf(1.0 / p) };
            Ok(NormReport { value, error_bound, params })
        }
        Exponent::Infinite => {
            let integrand = EnvelopedIntegrand::from_shape(LogShape::new().factor(1.0, f.clone()).gauss(-0.5 * alpha));
            let s = sup_plane(&integrand, spec, FarField::Auto).map_err(not_in_space)?;
            Ok(NormReport { value: s.sup, error_bound: 1e-10 * s.sup, params })
        }
    }
}

/// `⟨f, g⟩ = (α/π)∫ f(z)·conj(g(z))·e^{−α|z|²} dm(z)`.
///
/// The real and imaginary parts are integrated in one pass under the
/// modulus envelope, with the modulus itself as a third accumulator that
/// sets the convergence scale when the parts cancel.
pub fn inner_product(f: &ExpPoly, g: &ExpPoly, alpha: f64, spec: &QuadSpec) -> Result<Complex> {
    if !(alpha > 0.0) {
        return Err(FockError::Parameter(format!("alpha must be > 0, got {alpha}")));
    }
    let modulus = LogShape::new().factor(1.0, f.clone()).factor(1.0, g.clone()).gauss(-alpha);
    let env = modulus
        .envelope()
        .filter(|e| e.decays())
        .ok_or_else(|| FockError::Divergent { growth_exponent: f64::INFINITY })?;
    let sampler = |z: Complex| {
        let (lf, af) = f.eval_polar(z);
        let (lg, ag) = g.eval_polar(z);
        let l = lf + lg - alpha * z.norm_sqr();
        let (s, c) = (af - ag).sin_cos();
        (l, [1.0, c, s])
    };
    let tight = spec.with_rel_tol(spec.rel_tol.min(1e-10));
    let [_, re, im] = integrate_enveloped(&sampler, &env, &tight)?;
    let scale = alpha / PI;
    Ok(Complex::new(scale * re.value, scale * im.value))
}

/// Outcome of checking `|f(z)|e^{−α|z|²/2} ≤ ‖f‖_{(p,α)}` on sample points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PointwiseReport {
    pub norm: f64,
    pub worst_ratio: f64,
    pub worst_point: Complex,
    pub violations: usize,
    pub tolerance: f64,
}

pub fn pointwise_bound_check(
    f: &ExpPoly,
    params: FockParams,
    sample: &[Complex],
    spec: &QuadSpec,
) -> Result<PointwiseReport> {
    let norm = fock_norm(f, params, spec)?.value;
    let log_norm = norm.ln();
    let mut worst = (f64::NEG_INFINITY, Complex::default());
    let mut violations = 0;
    for &z in sample {
        let l = f.log_modulus(z) - 0.5 * params.alpha * z.norm_sqr() - log_norm;
        let ratio = l.exp();
        if ratio > 1.0 + POINTWISE_TOL {
            violations += 1;
        }
        if l > worst.0 {
            worst = (l, z);
        }
    }
    Ok(PointwiseReport {
        norm,
        worst_ratio: worst.0.exp(),
        worst_point: worst.1,
        violations,
        tolerance: POINTWISE_TOL,
    })
}

/// Derivative side of the norm characterization for a function given by
/// its value at the origin and its derivative:
///
/// * finite p: `|F(0)|^p + (αp/2π)∫|F′|^p(1+|z|)^{−p}e^{−pα|z|²/2} dm` (a p-th power);
/// * p = ∞: `|F(0)| + sup |F′|(1+|z|)^{−1}e^{−α|z|²/2}`.
pub fn derivative_side(at_zero: f64, fprime: &ExpPoly, params: FockParams, spec: &QuadSpec) -> Result<f64> {
    let alpha = params.alpha;
    match params.p {
        Exponent::Finite(p) => {
            let integrand = EnvelopedIntegrand::from_shape(derivative_integrand(fprime, alpha, p));
            let r = integrate_plane(&integrand, spec).map_err(not_in_space)?;
            Ok(at_zero.powf(p) + alpha * p / (2.0 * PI) * r.value)
        }
        Exponent::Infinite => {
            let integrand = EnvelopedIntegrand::from_shape(derivative_integrand(fprime, alpha, 1.0));
            let s = sup_plane(&integrand, spec, FarField::Auto).map_err(not_in_space)?;
            Ok(at_zero + s.sup)
        }
    }
}

/// Both sides of the derivative characterization and their ratio.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EquivalenceRatio {
    /// `‖f‖^p` (finite p) or `‖f‖_∞`.
    pub norm_side: f64,
    pub derivative_side: f64,
    pub ratio: f64,
}

pub fn derivative_equivalence_ratio(f: &ExpPoly, params: FockParams, spec: &QuadSpec) -> Result<EquivalenceRatio> {
    let norm = fock_norm(f, params, spec)?.value;
    let norm_side = match params.p {
        Exponent::Finite(p) => norm.powf(p),
        Exponent::Infinite => norm,
    };
    let at_zero = f.eval(Complex::default()).norm();
    let derivative_side = derivative_side(at_zero, &f.differentiate(), params, spec)?;
    Ok(EquivalenceRatio {
        norm_side,
        derivative_side,
        ratio: norm_side / derivative_side,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::{c, kernel};

    fn spec() -> QuadSpec {
        QuadSpec::default()
    }

    #[test]
    fn norm_of_one() {
        let one = ExpPoly::one();
        for alpha in [0.5, 1.0, 3.0] {
            let n = fock_norm(&one, FockParams::infinite(alpha).unwrap(), &spec()).unwrap();
            assert!((n.value - 1.0).abs() < 1e-12);
        }
        // (α/π)∫e^{−α|z|²} = 1
        let n = fock_norm(&one, FockParams::finite(1.0, 2.0).unwrap(), &spec()).unwrap();
        assert!((n.value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn normalized_kernel_has_unit_norm() {
        let k = kernel(c(1.0, 2.0), 1.0, true).unwrap();
        for p in [1.0, 2.0, 3.5] {
            let n = fock_norm(&k, FockParams::finite(1.0, p).unwrap(), &spec()).unwrap();
            assert!((n.value - 1.0).abs() < 1e-8, "p={p}: {}", n.value);
        }
        let n = fock_norm(&k, FockParams::infinite(1.0).unwrap(), &spec()).unwrap();
        assert!((n.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn super_gaussian_function_is_not_in_space() {
        let f = ExpPoly::exp(Poly::monomial(2, c(1.0, 0.0)));
        let r = fock_norm(&f, FockParams::finite(1.0, 2.0).unwrap(), &spec());
        assert_eq!(r.unwrap_err(), FockError::NotInSpace);
        let r = fock_norm(&f, FockParams::infinite(1.0).unwrap(), &spec());
        assert_eq!(r.unwrap_err(), FockError::NotInSpace);
    }

    #[test]
    fn inner_product_examples() {
        let one = ExpPoly::one();
        let z = ExpPoly::poly(Poly::identity());
        let v = inner_product(&one, &one, 1.0, &spec()).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-9);
        let v = inner_product(&z, &one, 1.0, &spec()).unwrap();
        assert!(v.norm() < 1e-9);
        let f = ExpPoly::poly(Poly::monomial(2, c(1.0, 0.0)));
        let w = c(1.0, 1.0);
        let kw = kernel(w, 1.0, false).unwrap();
        let v = inner_product(&f, &kw, 1.0, &spec()).unwrap();
        assert!((v - c(0.0, 2.0)).norm() < 1e-7, "{v}");
    }

    #[test]
    fn pointwise_examples() {
        let one = ExpPoly::one();
        let grid: Vec<Complex> = (-10..=10)
            .flat_map(|i| (-10..=10).map(move |j| c(0.5 * i as f64, 0.5 * j as f64)))
            .collect();
        let r = pointwise_bound_check(&one, FockParams::infinite(1.0).unwrap(), &grid, &spec()).unwrap();
        assert_eq!(r.violations, 0);
        assert!(r.worst_ratio <= 1.0);

        let w = c(1.5, -0.5);
        let k = kernel(w, 1.0, true).unwrap();
        let r = pointwise_bound_check(&k, FockParams::finite(1.0, 2.0).unwrap(), &[w], &spec()).unwrap();
        assert!((r.worst_ratio - 1.0).abs() < 1e-8);

        // ‖z‖_{2,1} = 1 and max |z|e^{−|z|²/2} = e^{−1/2}
        let z = ExpPoly::poly(Poly::identity());
        let r = pointwise_bound_check(&z, FockParams::finite(1.0, 2.0).unwrap(), &grid, &spec()).unwrap();
        assert!((r.norm - 1.0).abs() < 1e-9);
        assert!(r.worst_ratio <= (-0.5f64).exp() * (1.0 + 1e-8));
        assert_eq!(r.violations, 0);
    }

    #[test]
    fn equivalence_examples() {
        let one = ExpPoly::one();
        let r = derivative_equivalence_ratio(&one, FockParams::finite(1.0, 2.0).unwrap(), &spec()).unwrap();
        assert!((r.ratio - 1.0).abs() < 1e-9);
        let z = ExpPoly::poly(Poly::identity());
        let r = derivative_equivalence_ratio(&z, FockParams::infinite(1.0).unwrap(), &spec()).unwrap();
        assert!((r.norm_side - (-0.5f64).exp()).abs() < 1e-10);
        assert!((r.derivative_side - 1.0).abs() < 1e-10);
        assert!((r.ratio - (-0.5f64).exp()).abs() < 1e-10);
    }

    #[test]
    fn homogeneity() {
        let f = ExpPoly::new(Poly::from_real(&[1.0, -2.0, 0.5]), Poly::new(vec![c(0.0, 0.0), c(0.2, 0.3)]));
        let s = c(-1.5, 2.0);
        for p in [Exponent::Finite(1.0), Exponent::Finite(2.0), Exponent::Infinite] {
            let params = FockParams::new(1.0, p).unwrap();
            let a = fock_norm(&f, params, &spec()).unwrap().value;
            let b = fock_norm(&f.scale(s), params, &spec()).unwrap().value;
            assert!((b - s.norm() * a).abs() <= 1e-10 * b, "{p}: {a} {b}");
        }
    }
}
