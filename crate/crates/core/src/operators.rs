//! The five operator kinds applied to symbols, and empirical operator norms
//! over a test corpus.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FockError, Result};
use crate::fock::{derivative_side, fock_norm};
use crate::quadrature::{integrate_segment, QuadSpec};
use crate::symbols::{c, kernel, Complex, Exponent, ExpPoly, FockParams, Poly};

/// Tolerance of the segment quadrature behind integral-type operators.
pub const SEGMENT_TOL: f64 = 1e-13;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OperatorKind {
    /// `f ↦ ∫_0^z f g′`
    Vg,
    /// `f ↦ f∘ψ`
    Cpsi,
    /// `f ↦ ∫_0^z f(ψ(w)) g′(w) dw`
    VgPsi,
    /// `f ↦ ∫_0^{ψ(z)} f g′`
    CpsiG,
    /// `f ↦ u·f∘ψ`
    #[serde(rename = "uCpsi")]
    UCpsi,
}

impl std::fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            OperatorKind::Vg => "Vg",
            OperatorKind::Cpsi => "Cpsi",
            OperatorKind::VgPsi => "VgPsi",
            OperatorKind::CpsiG => "CpsiG",
            OperatorKind::UCpsi => "uCpsi",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    pub kind: OperatorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<ExpPoly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<Poly>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<ExpPoly>,
}

impl OperatorSpec {
    pub fn vg(g: ExpPoly) -> Self {
        OperatorSpec { kind: OperatorKind::Vg, g: Some(g), psi: None, u: None }
    }

    pub fn cpsi(psi: Poly) -> Self {
        OperatorSpec { kind: OperatorKind::Cpsi, g: None, psi: Some(psi), u: None }
    }

    pub fn vg_psi(g: ExpPoly, psi: Poly) -> Self {
        OperatorSpec { kind: OperatorKind::VgPsi, g: Some(g), psi: Some(psi), u: None }
    }

    pub fn cpsi_g(psi: Poly, g: ExpPoly) -> Self {
        OperatorSpec { kind: OperatorKind::CpsiG, g: Some(g), psi: Some(psi), u: None }
    }

    pub fn u_cpsi(u: ExpPoly, psi: Poly) -> Self {
        OperatorSpec { kind: OperatorKind::UCpsi, g: None, psi: Some(psi), u: Some(u) }
    }

    pub fn validate(&self) -> Result<()> {
        let (need_g, need_psi, need_u) = match self.kind {
            OperatorKind::Vg => (true, false, false),
            OperatorKind::Cpsi => (false, true, false),
            OperatorKind::VgPsi | OperatorKind::CpsiG => (true, true, false),
            OperatorKind::UCpsi => (false, true, true),
        };
        let missing = [(need_g && self.g.is_none(), "g"), (need_psi && self.psi.is_none(), "psi"), (need_u && self.u.is_none(), "u")];
        for (m, name) in missing {
            if m {
                return Err(FockError::Input(format!("operator {} requires symbol {name}", self.kind)));
            }
        }
        Ok(())
    }

    /// `g`, or an error for kinds without one.
    pub fn g(&self) -> Result<&ExpPoly> {
        self.g.as_ref().ok_or_else(|| FockError::Input(format!("operator {} has no g", self.kind)))
    }

    /// `ψ`, defaulting to the identity for `V_g`.
    pub fn psi(&self) -> Poly {
        match (self.kind, &self.psi) {
            (OperatorKind::Vg, _) | (_, None) => Poly::identity(),
            (_, Some(p)) => p.clone(),
        }
    }

    pub fn u(&self) -> Result<&ExpPoly> {
        self.u.as_ref().ok_or_else(|| FockError::Input(format!("operator {} has no u", self.kind)))
    }
}

/// How the values of an applied function are obtained.
#[derive(Clone, Debug, PartialEq)]
pub enum AppliedValue {
    /// Closed form.
    Exact(ExpPoly),
    /// `∫_0^{upper(z)} integrand(w) dw` along the straight segment.
    Integral { integrand: ExpPoly, upper: Poly },
}

/// `T f` for one operator and one input symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct AppliedFunction {
    pub value: AppliedValue,
    /// Exact derivative of `T f`.
    pub derivative: ExpPoly,
    pub op: OperatorSpec,
    pub input: ExpPoly,
}

impl AppliedFunction {
    pub fn eval(&self, z: Complex) -> Result<Complex> {
        match &self.value {
            AppliedValue::Exact(h) => Ok(h.eval(z)),
            AppliedValue::Integral { integrand, upper } => {
                integrate_segment(|w| integrand.eval(w), Complex::default(), upper.eval(z), SEGMENT_TOL)
            }
        }
    }

    pub fn eval_derivative(&self, z: Complex) -> Complex {
        self.derivative.eval(z)
    }

    /// `|T f(0)|`.
    pub fn modulus_at_zero(&self) -> Result<f64> {
        Ok(self.eval(Complex::default())?.norm())
    }

    /// The closed form, when one exists.
    pub fn exact(&self) -> Option<&ExpPoly> {
        match &self.value {
            AppliedValue::Exact(h) => Some(h),
            AppliedValue::Integral { .. } => None,
        }
    }
}

pub fn apply(op: &OperatorSpec, f: &ExpPoly) -> Result<AppliedFunction> {
    op.validate()?;
    let psi = op.psi();
    let (value, derivative) = match op.kind {
        OperatorKind::Vg | OperatorKind::VgPsi => {
            let integrand = f.compose(&psi).multiply(&op.g()?.differentiate());
            (AppliedValue::Integral { integrand: integrand.clone(), upper: Poly::identity() }, integrand)
        }
        OperatorKind::CpsiG => {
            let integrand = f.multiply(&op.g()?.differentiate());
            let derivative = integrand.compose(&psi).multiply(&ExpPoly::poly(psi.derivative()));
            (AppliedValue::Integral { integrand, upper: psi }, derivative)
        }
        OperatorKind::Cpsi => {
            let h = f.compose(&psi);
            let d = h.differentiate();
            (AppliedValue::Exact(h), d)
        }
        OperatorKind::UCpsi => {
            let h = op.u()?.multiply(&f.compose(&psi));
            let d = h.differentiate();
            (AppliedValue::Exact(h), d)
        }
    };
    Ok(AppliedFunction { value, derivative, op: op.clone(), input: f.clone() })
}

/// Constants, monomials `z^k` (k ≤ 4) and normalized kernels `k_w` at
/// `|w| ∈ {1, 2, 4, 6}` on the real and imaginary axes.
pub fn default_corpus(alpha: f64) -> Result<Vec<ExpPoly>> {
    let mut corpus = vec![ExpPoly::one()];
    for k in 1..=4 {
        corpus.push(ExpPoly::poly(Poly::monomial(k, c(1.0, 0.0))));
    }
    for r in [1.0, 2.0, 4.0, 6.0] {
        corpus.push(kernel(c(r, 0.0), alpha, true)?);
        corpus.push(kernel(c(0.0, r), alpha, true)?);
    }
    Ok(corpus)
}

/// Target norm of `T f`: the norm itself when `T f` has a closed form,
/// otherwise the derivative characterization.
pub fn applied_norm(tf: &AppliedFunction, target: FockParams, spec: &QuadSpec) -> Result<f64> {
    if let Some(h) = tf.exact() {
        return Ok(fock_norm(h, target, spec)?.value);
    }
    let at_zero = tf.modulus_at_zero()?;
    let side = derivative_side(at_zero, &tf.derivative, target, spec)?;
    Ok(match target.p {
        Exponent::Finite(p) => side.powf(1.0 / p),
        Exponent::Infinite => side,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmpiricalNorm {
    /// `max ‖T f‖/‖f‖` over the corpus; `∞` when some image leaves the target space.
    pub lower_bound: f64,
    pub witness_index: usize,
    pub witness: ExpPoly,
    pub ratios: Vec<f64>,
}

pub fn empirical_operator_norm(
    op: &OperatorSpec,
    source: FockParams,
    target: FockParams,
    corpus: &[ExpPoly],
    spec: &QuadSpec,
) -> Result<EmpiricalNorm> {
    op.validate()?;
    if corpus.is_empty() {
        return Err(FockError::Input("empty corpus".into()));
    }
    let ratios: Vec<Result<f64>> = corpus
        .par_iter()
        .map(|f| {
            let src = fock_norm(f, source, spec)?.value;
            if !(src > 0.0) {
                return Err(FockError::Input("corpus member has zero source norm".into()));
            }
            let tf = apply(op, f)?;
            match applied_norm(&tf, target, spec) {
                Ok(t) => Ok(t / src),
                Err(FockError::NotInSpace) | Err(FockError::Divergent { .. }) => Ok(f64::INFINITY),
                Err(e) => Err(e),
            }
        })
        .collect();
    let ratios = ratios.into_iter().collect::<Result<Vec<f64>>>()?;
    let mut best = 0;
    for (i, &r) in ratios.iter().enumerate() {
        if r > ratios[best] {
            best = i;
        }
    }
    Ok(EmpiricalNorm {
        lower_bound: ratios[best],
        witness_index: best,
        witness: corpus[best].clone(),
        ratios,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(cs: &[f64]) -> Poly {
        Poly::from_real(cs)
    }

    #[test]
    fn vg_of_one_with_square() {
        let op = OperatorSpec::vg(ExpPoly::poly(poly(&[0.0, 0.0, 1.0])));
        let tf = apply(&op, &ExpPoly::one()).unwrap();
        let v = tf.eval(c(1.0, 1.0)).unwrap();
        assert!((v - c(0.0, 2.0)).norm() < 1e-13);
        assert_eq!(tf.eval(Complex::default()).unwrap(), Complex::default());
    }

    #[test]
    fn cpsi_g_closed_form() {
        let op = OperatorSpec::cpsi_g(poly(&[0.0, 2.0]), ExpPoly::poly(Poly::identity()));
        let tf = apply(&op, &ExpPoly::one()).unwrap();
        assert!((tf.eval(c(3.0, 0.0)).unwrap() - c(6.0, 0.0)).norm() < 1e-12);
        assert!((tf.eval_derivative(c(3.0, 0.0)) - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn exact_kinds() {
        let f = ExpPoly::poly(poly(&[1.0, 0.0, 1.0]));
        let tf = apply(&OperatorSpec::cpsi(poly(&[1.0, 0.5])), &f).unwrap();
        // 1 + (1 + z/2)²
        assert!((tf.eval(c(2.0, 0.0)).unwrap() - c(5.0, 0.0)).norm() < 1e-14);
        let tf = apply(&OperatorSpec::u_cpsi(ExpPoly::poly(Poly::identity()), Poly::identity()), &f).unwrap();
        assert!((tf.eval(c(2.0, 0.0)).unwrap() - c(10.0, 0.0)).norm() < 1e-14);
        assert!((tf.eval_derivative(c(2.0, 0.0)) - c(13.0, 0.0)).norm() < 1e-13);
    }

    #[test]
    fn missing_symbols_are_rejected() {
        let op = OperatorSpec { kind: OperatorKind::VgPsi, g: Some(ExpPoly::one()), psi: None, u: None };
        assert!(matches!(apply(&op, &ExpPoly::one()), Err(FockError::Input(_))));
        let op = OperatorSpec { kind: OperatorKind::UCpsi, g: None, psi: Some(Poly::identity()), u: None };
        assert!(op.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let op = OperatorSpec::vg_psi(ExpPoly::poly(poly(&[0.0, 1.0])), poly(&[0.0, 0.5]));
        let s = serde_json::to_string(&op).unwrap();
        let back: OperatorSpec = serde_json::from_str(&s).unwrap();
        assert_eq!(op, back);
        let u: OperatorSpec = serde_json::from_str(r#"{"kind":"uCpsi","u":{"p":[[1,0]]},"psi":{"p":[[0,0],[0.5,0]]}}"#).unwrap();
        assert_eq!(u.kind, OperatorKind::UCpsi);
    }

    #[test]
    fn constant_composition_is_contractive() {
        let alpha = 1.0;
        let corpus = default_corpus(alpha).unwrap();
        let op = OperatorSpec::cpsi(Poly::zero());
        for p in [Exponent::Finite(2.0), Exponent::Infinite] {
            let params = FockParams::new(alpha, p).unwrap();
            let e = empirical_operator_norm(&op, params, params, &corpus, &QuadSpec::default()).unwrap();
            assert!(e.lower_bound <= 1.0 + 1e-8, "{e:?}");
        }
    }

    #[test]
    fn linear_vg_ratios_stay_below_criterion_sup() {
        // sup |g′|/(1+|z|) = 1 for g = z
        let alpha = 1.0;
        let corpus = default_corpus(alpha).unwrap();
        let op = OperatorSpec::vg(ExpPoly::poly(Poly::identity()));
        let target = FockParams::infinite(alpha).unwrap();
        let source = FockParams::finite(alpha, 2.0).unwrap();
        let e = empirical_operator_norm(&op, source, target, &corpus, &QuadSpec::default()).unwrap();
        assert!(e.lower_bound.is_finite() && e.lower_bound <= 1.0 + 1e-8, "{e:?}");
    }

    #[test]
    fn cubic_vg_kernel_ratios_grow() {
        let alpha = 1.0;
        let op = OperatorSpec::vg(ExpPoly::poly(poly(&[0.0, 0.0, 0.0, 1.0])));
        let params = FockParams::infinite(alpha).unwrap();
        let ws = [1.0, 2.0, 4.0, 6.0];
        let corpus: Vec<ExpPoly> = ws.iter().map(|&r| kernel(c(r, 0.0), alpha, true).unwrap()).collect();
        let e = empirical_operator_norm(&op, params, params, &corpus, &QuadSpec::default()).unwrap();
        assert!(e.ratios.windows(2).all(|w| w[1] > w[0]), "{:?}", e.ratios);
        assert_eq!(e.witness_index, 3);
        // 3|w|²/(1+|w|) at the kernel peak is a lower estimate
        assert!(e.lower_bound >= 3.0 * 36.0 / 7.0 * (1.0 - 1e-6));
    }
}
