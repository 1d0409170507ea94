//! Criterion functions: the pointwise quantities `B^∞`, `M^∞`, `U^∞`, the
//! Berezin-type transforms `B_p`, `M_p`, `U_p`, and their total masses.
//!
//! Berezin integrands are evaluated in the squared-off form
//! `e^{(pα/2)(|ψ|²−|z|²−|w−ψ|²)}·weight^p`, which is a real exponential and
//! therefore manifestly positive. The kernel form
//! `|k_w(ψ)|^p·weight^p·e^{−pα|z|²/2}` is kept for cross-checks and supplies
//! the envelope.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{FockError, Result};
use crate::operators::{OperatorKind, OperatorSpec};
use crate::quadrature::{
    divergence_probe, integrate_plane, sup_plane, EnvelopedIntegrand, FarField, LogShape, ProbeOutcome, QuadSpec,
    Supremum, LOG_OVERFLOW,
};
use crate::symbols::{kernel, Complex, Exponent, ExpPoly, FockParams, Poly};

/// Radii of the partial-integral ladder for integrands without a decaying envelope.
pub const PROBE_RADII: [f64; 4] = [10.0, 1e2, 1e3, 1e4];

/// The weight multiplying the Gaussian factor in a criterion.
#[derive(Clone, Debug, PartialEq)]
pub enum Weight {
    /// `|g′(z)|/(1+|z|)`
    B(ExpPoly),
    /// `|g′(ψ(z))ψ′(z)|/(1+|z|)`
    M(ExpPoly),
    /// `|u(z)|`
    U(ExpPoly),
}

impl Weight {
    /// The weight and symbol `ψ` associated with an operator.
    pub fn for_operator(op: &OperatorSpec) -> Result<(Weight, Poly)> {
        op.validate()?;
        let psi = op.psi();
        let w = match op.kind {
            OperatorKind::Vg | OperatorKind::VgPsi => Weight::B(op.g()?.clone()),
            OperatorKind::CpsiG => Weight::M(op.g()?.clone()),
            OperatorKind::Cpsi => Weight::U(ExpPoly::one()),
            OperatorKind::UCpsi => Weight::U(op.u()?.clone()),
        };
        Ok((w, psi))
    }

    /// `weight^s` as a log-domain shape.
    pub fn shape(&self, psi: &Poly, s: f64) -> LogShape {
        match self {
            Weight::B(g) => LogShape::new().factor(s, g.differentiate()).damping(s, Poly::identity()),
            Weight::M(g) => LogShape::new()
                .factor(s, g.differentiate().compose(psi))
                .factor(s, ExpPoly::poly(psi.derivative()))
                .damping(s, Poly::identity()),
            Weight::U(u) => LogShape::new().factor(s, u.clone()),
        }
    }

    pub fn pointwise_kind(&self) -> CriterionKind {
        match self {
            Weight::B(_) => CriterionKind::Binf,
            Weight::M(_) => CriterionKind::Minf,
            Weight::U(_) => CriterionKind::Uinf,
        }
    }

    pub fn integral_kind(&self) -> CriterionKind {
        match self {
            Weight::B(_) => CriterionKind::Bp,
            Weight::M(_) => CriterionKind::Mp,
            Weight::U(_) => CriterionKind::Up,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CriterionKind {
    Binf,
    Minf,
    Uinf,
    Bp,
    Mp,
    Up,
}

/// `weight·e^{(α/2)(|ψ|²−|z|²)}`.
pub fn pointwise_shape(weight: &Weight, psi: &Poly, alpha: f64) -> LogShape {
    weight.shape(psi, 1.0).mod_sq(0.5 * alpha, psi.clone()).gauss(-0.5 * alpha)
}

/// `ln B^∞(z) = ln(|g′(z)|/(1+|z|)) + (α/2)(|ψ(z)|²−|z|²)`.
pub fn binf_pointwise(g: &ExpPoly, psi: &Poly, alpha: f64, z: Complex) -> f64 {
    pointwise_shape(&Weight::B(g.clone()), psi, alpha).eval(z)
}

/// `ln M^∞(z) = ln(|g′(ψ(z))ψ′(z)|/(1+|z|)) + (α/2)(|ψ(z)|²−|z|²)`.
pub fn minf_pointwise(g: &ExpPoly, psi: &Poly, alpha: f64, z: Complex) -> f64 {
    pointwise_shape(&Weight::M(g.clone()), psi, alpha).eval(z)
}

/// `ln U^∞(z) = ln|u(z)| + (α/2)(|ψ(z)|²−|z|²)`.
pub fn uinf_pointwise(u: &ExpPoly, psi: &Poly, alpha: f64, z: Complex) -> f64 {
    pointwise_shape(&Weight::U(u.clone()), psi, alpha).eval(z)
}

/// Supremum of the pointwise criterion over ℂ.
pub fn criterion_sup(weight: &Weight, psi: &Poly, alpha: f64, spec: &QuadSpec) -> Result<Supremum> {
    let f = EnvelopedIntegrand::from_shape(pointwise_shape(weight, psi, alpha));
    sup_plane(&f, spec, FarField::Auto)
}

fn finite_p(params: FockParams) -> Result<f64> {
    params
        .p
        .finite()
        .ok_or_else(|| FockError::Parameter("Berezin-type transforms need a finite exponent".into()))
}

/// Squared-off Berezin integrand at `w`.
pub fn berezin_shape(weight: &Weight, psi: &Poly, alpha: f64, p: f64, w: Complex) -> LogShape {
    let c = 0.5 * p * alpha;
    weight
        .shape(psi, p)
        .mod_sq(c, psi.clone())
        .gauss(-c)
        .mod_sq(-c, psi.sub(&Poly::constant(w)))
}

/// Kernel-form Berezin integrand at `w`.
pub fn berezin_kernel_shape(weight: &Weight, psi: &Poly, alpha: f64, p: f64, w: Complex) -> Result<LogShape> {
    let k = kernel(w, alpha, true)?.compose(psi);
    Ok(weight.shape(psi, p).factor(p, k).gauss(-0.5 * p * alpha))
}

/// A transform value with its numerical error bound.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TransformValue {
    pub value: f64,
    pub error_bound: f64,
}

fn from_outcome(outcome: ProbeOutcome) -> Result<TransformValue> {
    match outcome {
        ProbeOutcome::Convergent { value, error_bound } => Ok(TransformValue { value, error_bound }),
        ProbeOutcome::Divergent { growth_exponent, .. } => Err(FockError::Divergent { growth_exponent }),
        ProbeOutcome::Indeterminate { log_partials } => {
            Err(FockError::Indeterminate(format!("partial integrals {log_partials:?}")))
        }
    }
}

/// Berezin-type transform of `weight^p` at `w`, squared-off form.
pub fn berezin(weight: &Weight, psi: &Poly, params: FockParams, w: Complex, spec: &QuadSpec) -> Result<TransformValue> {
    let p = finite_p(params)?;
    let alpha = params.alpha;
    let squared = berezin_shape(weight, psi, alpha, p, w);
    let envelope = berezin_kernel_shape(weight, psi, alpha, p, w)?
        .envelope()
        .or_else(|| squared.envelope());
    let f = EnvelopedIntegrand::new(move |z| squared.eval(z), envelope);
    from_outcome(integrate_or_probe(&f, spec)?)
}

/// Berezin-type transform of `weight^p` at `w`, kernel form.
pub fn berezin_kernel_form(
    weight: &Weight,
    psi: &Poly,
    params: FockParams,
    w: Complex,
    spec: &QuadSpec,
) -> Result<TransformValue> {
    let p = finite_p(params)?;
    let shape = berezin_kernel_shape(weight, psi, params.alpha, p, w)?;
    from_outcome(integrate_or_probe(&EnvelopedIntegrand::from_shape(shape), spec)?)
}

/// `B_{(ψ,α)}(|g|^p)(w)`.
pub fn berezin_b(g: &ExpPoly, psi: &Poly, params: FockParams, w: Complex, spec: &QuadSpec) -> Result<TransformValue> {
    berezin(&Weight::B(g.clone()), psi, params, w, spec)
}

/// `M_{(ψ,α)}(|g|^p)(w)`.
pub fn berezin_m(g: &ExpPoly, psi: &Poly, params: FockParams, w: Complex, spec: &QuadSpec) -> Result<TransformValue> {
    berezin(&Weight::M(g.clone()), psi, params, w, spec)
}

/// The multiplier analogue: `sup U^∞` for `p = ∞`, the Berezin-type
/// transform of `|u|^p` at `w` otherwise.
pub fn u_transform(
    u: &ExpPoly,
    psi: &Poly,
    params: FockParams,
    w: Option<Complex>,
    spec: &QuadSpec,
) -> Result<TransformValue> {
    let weight = Weight::U(u.clone());
    match params.p {
        Exponent::Infinite => {
            let s = criterion_sup(&weight, psi, params.alpha, spec)?;
            Ok(TransformValue { value: s.sup, error_bound: 1e-10 * s.sup })
        }
        Exponent::Finite(_) => {
            let w = w.ok_or_else(|| FockError::Parameter("finite p needs a point w".into()))?;
            berezin(&weight, psi, params, w, spec)
        }
    }
}

/// Plane integral when a decaying envelope is available, otherwise a growth
/// pre-scan followed by the partial-integral ladder.
pub fn integrate_or_probe(f: &EnvelopedIntegrand<'_>, spec: &QuadSpec) -> Result<ProbeOutcome> {
    if let Some(env) = f.envelope() {
        if env.log_c == f64::NEG_INFINITY {
            return Ok(ProbeOutcome::Convergent { value: 0.0, error_bound: 0.0 });
        }
        if env.decays() {
            match integrate_plane(f, spec) {
                Ok(r) => {
                    return Ok(ProbeOutcome::Convergent { value: r.value, error_bound: r.error_bound });
                }
                Err(FockError::Envelope(_)) => {}
                Err(e) => return Err(e),
            }
        }
    }
    if super_polynomial_growth(f) {
        return Ok(ProbeOutcome::Divergent { growth_exponent: f64::INFINITY, logarithmic: false });
    }
    divergence_probe(f, &PROBE_RADII, spec)
}

/// True when the circle mean of `F` overflows somewhere on `|z| ≤ 10⁴`.
fn super_polynomial_growth(f: &EnvelopedIntegrand<'_>) -> bool {
    let mut r = 1.0;
    while r <= PROBE_RADII[PROBE_RADII.len() - 1] {
        let n = 256;
        let logs: Vec<f64> = (0..n)
            .map(|j| f.log_eval(Complex::from_polar(r, 2.0 * PI * (j as f64 + 0.5) / n as f64)))
            .collect();
        let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if m > LOG_OVERFLOW {
            let mean = m + (logs.iter().map(|l| (l - m).exp()).sum::<f64>() / n as f64).ln();
            if mean > LOG_OVERFLOW {
                return true;
            }
        }
        r *= 2.0;
    }
    false
}

/// Fubini-reduced integrand `(2π/(pα))·e^{(pα/2)(|ψ|²−|z|²)}·weight^p`.
pub fn total_mass_shape(weight: &Weight, psi: &Poly, alpha: f64, p: f64) -> LogShape {
    let c = 0.5 * p * alpha;
    weight
        .shape(psi, p)
        .mod_sq(c, psi.clone())
        .gauss(-c)
        .with_const((2.0 * PI / (p * alpha)).ln())
}

/// `∫_ℂ (transform)(w) dm(w)` through the Fubini reduction.
pub fn total_mass(weight: &Weight, psi: &Poly, params: FockParams, spec: &QuadSpec) -> Result<ProbeOutcome> {
    let p = finite_p(params)?;
    let f = EnvelopedIntegrand::from_shape(total_mass_shape(weight, psi, params.alpha, p));
    integrate_or_probe(&f, spec)
}

/// `∫_ℂ (transform)(w) dm(w)` by an outer trapezoid grid over nested
/// Berezin integrals. Only for cases where the reduced integrand has a
/// decaying envelope.
pub fn total_mass_nested(weight: &Weight, psi: &Poly, params: FockParams, spec: &QuadSpec) -> Result<f64> {
    let p = finite_p(params)?;
    let alpha = params.alpha;
    let reduced = total_mass_shape(weight, psi, alpha, p);
    let env = reduced
        .envelope()
        .filter(|e| e.decays())
        .ok_or_else(|| FockError::Envelope("nested total mass needs a decaying reduced integrand".into()))?;
    if env.log_c == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    let scale = integrate_plane(&EnvelopedIntegrand::from_shape(reduced), spec)?.value;
    let c = 0.5 * p * alpha;
    // the transform is the reduced integrand (pushed forward by ψ) smoothed
    // by a Gaussian of parameter c
    let centre = psi.eval(Complex::default());
    let spread = psi.coeffs().get(1).map_or(0.0, |a| a.norm());
    let inner = env.radius_for_tail((1e-9 * scale).ln());
    let extent = spread * inner + (30.0 / c).sqrt() + 1.0;
    let h = PI / (6.0 * c.sqrt());
    let n = (extent / h).ceil() as i64;
    let points: Vec<Complex> = (-n..=n)
        .flat_map(|i| (-n..=n).map(move |j| centre + Complex::new(i as f64 * h, j as f64 * h)))
        .collect();
    let inner_spec = spec.with_rel_tol(spec.rel_tol.max(1e-8));
    let values: Vec<Result<f64>> = points
        .par_iter()
        .map(|&w| berezin(weight, psi, params, w, &inner_spec).map(|t| t.value))
        .collect();
    let mut total = crate::quadrature::rules::KahanSum::default();
    for v in values {
        total.add(v?);
    }
    Ok(total.value() * h * h)
}

/// One point of a radial profile.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub radius: f64,
    pub value: f64,
    pub log_value: f64,
}

/// What a criterion evaluation produced.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum VerdictInputs {
    Sup { sup: f64, log_sup: f64, argmax: Complex, attained_inside: bool },
    Unbounded { log_value: f64, radius: f64 },
    Value { w: Complex, value: f64, error_bound: f64 },
    Mass(ProbeOutcome),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionProfile {
    pub kind: CriterionKind,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub radial_profile: Vec<ProfilePoint>,
    pub verdict_inputs: VerdictInputs,
}

/// Circle maxima of `exp(shape)` at the given radii.
pub fn shape_profile(shape: &LogShape, radii: &[f64]) -> Vec<ProfilePoint> {
    radii
        .par_iter()
        .map(|&r| {
            let n = if r == 0.0 { 1 } else { 512 };
            let log_value = (0..n)
                .map(|j| shape.eval(Complex::from_polar(r, 2.0 * PI * j as f64 / n as f64)))
                .fold(f64::NEG_INFINITY, f64::max);
            ProfilePoint { radius: r, value: log_value.exp(), log_value }
        })
        .collect()
}

/// Circle maxima of the pointwise criterion.
pub fn pointwise_profile(weight: &Weight, psi: &Poly, alpha: f64, radii: &[f64]) -> Vec<ProfilePoint> {
    shape_profile(&pointwise_shape(weight, psi, alpha), radii)
}

/// Circle maxima (over 16 angles) of the Berezin-type transform in `w`.
pub fn berezin_profile(
    weight: &Weight,
    psi: &Poly,
    params: FockParams,
    radii: &[f64],
    spec: &QuadSpec,
) -> Result<Vec<ProfilePoint>> {
    radii
        .iter()
        .map(|&r| {
            let n = if r == 0.0 { 1 } else { 16 };
            let mut best = f64::NEG_INFINITY;
            for j in 0..n {
                let w = Complex::from_polar(r, 2.0 * PI * j as f64 / n as f64);
                let v = berezin(weight, psi, params, w, spec)?.value;
                best = best.max(v.ln());
            }
            Ok(ProfilePoint { radius: r, value: best.exp(), log_value: best })
        })
        .collect()
}

/// `0, 1, …, n` scaled by `step`.
pub fn linear_radii(n: usize, step: f64) -> Vec<f64> {
    (0..=n).map(|i| i as f64 * step).collect()
}
