//! Boundedness and compactness verdicts: symbolic rules for polynomial
//! symbols and numeric criteria for general ones.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{FockError, Result};
use crate::operators::{OperatorKind, OperatorSpec};
use crate::quadrature::rules::gauss_legendre;
use crate::quadrature::{classify_partials, sup_plane, EnvelopedIntegrand, FarField, LogShape, ProbeOutcome, QuadSpec};
use crate::symbols::{Complex, Exponent, FockParams, Poly};
use crate::transforms::{
    berezin, criterion_sup, pointwise_profile, pointwise_shape, total_mass, CriterionKind, CriterionProfile,
    ProfilePoint, VerdictInputs, Weight,
};

/// Base radii `R` of the annuli `R ≤ |ψ(z)| ≤ 2R` used for the limit test.
pub const LIMIT_RADII: [f64; 7] = [10.0, 40.0, 160.0, 640.0, 2560.0, 10240.0, 40960.0];

/// A limit counts as zero once the annulus maxima fall below this fraction of the supremum.
pub const LIMIT_FRACTION: f64 = 1e-6;

/// ... or decay at least this fast in `ln R`.
pub const LIMIT_SLOPE: f64 = -0.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Tri {
    Yes,
    No,
    Indeterminate,
}

impl Tri {
    pub fn from_bool(b: bool) -> Self {
        if b {
            Tri::Yes
        } else {
            Tri::No
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpacePair {
    pub source: FockParams,
    pub target: FockParams,
}

impl SpacePair {
    pub fn new(source: FockParams, target: FockParams) -> Result<Self> {
        if source.alpha != target.alpha {
            return Err(FockError::Parameter("source and target must share alpha".into()));
        }
        Ok(SpacePair { source, target })
    }

    pub fn alpha(&self) -> f64 {
        self.source.alpha
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Symbolic,
    Numeric,
}

/// `‖T‖^power ≃ value`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormEstimate {
    pub power: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verdict {
    pub bounded: Tri,
    pub compact: Tri,
    pub method: Method,
    pub rule: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evidence: Option<CriterionProfile>,
    /// Maxima of the criterion over `R ≤ |ψ(z)| ≤ 2R` (target ∞), or over
    /// `|w| = R` (finite pairs).
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub limit_profile: Vec<ProfilePoint>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm_estimate: Option<NormEstimate>,
}

impl Verdict {
    fn new(bounded: Tri, compact: Tri, method: Method, rule: impl Into<String>) -> Self {
        Verdict {
            bounded,
            compact,
            method,
            rule: rule.into(),
            evidence: None,
            limit_profile: Vec::new(),
            norm_estimate: None,
        }
    }
}

fn out_of_scope(op: &OperatorSpec, pair: &SpacePair) -> FockError {
    FockError::OutOfScope(format!(
        "no symbolic rule for {} from p={} to p={}",
        op.kind, pair.source.p, pair.target.p
    ))
}

/// Closed-form rules for polynomial symbols.
pub fn classify_symbolic(op: &OperatorSpec, pair: &SpacePair) -> Result<Verdict> {
    op.validate()?;
    match (op.kind, pair.source.p, pair.target.p) {
        (OperatorKind::Vg, _, Exponent::Infinite) => {
            let g = op.g()?.as_poly().ok_or_else(|| out_of_scope(op, pair))?;
            let deg = g.degree().unwrap_or(0);
            Ok(Verdict::new(
                Tri::from_bool(deg <= 2),
                Tri::from_bool(deg <= 1),
                Method::Symbolic,
                "V_g into F^inf: bounded iff g = az^2+bz+c, compact iff g = az+b",
            ))
        }
        (OperatorKind::Vg, Exponent::Infinite, Exponent::Finite(p)) => {
            let g = op.g()?.as_poly().ok_or_else(|| out_of_scope(op, pair))?;
            let deg = g.degree().unwrap_or(0);
            // constant g gives the zero operator
            let ok = deg == 0 || (deg == 1 && p > 2.0);
            Ok(Verdict::new(
                Tri::from_bool(ok),
                Tri::from_bool(ok),
                Method::Symbolic,
                "V_g from F^inf to F^p: bounded iff compact iff g = az+b and p > 2",
            ))
        }
        (OperatorKind::Cpsi, Exponent::Infinite, Exponent::Finite(_)) => {
            let psi = op.psi();
            let ok = psi.degree().unwrap_or(0) <= 1 && psi.coeff(1).norm() < 1.0;
            Ok(Verdict::new(
                Tri::from_bool(ok),
                Tri::from_bool(ok),
                Method::Symbolic,
                "C_psi from F^inf to F^p: bounded iff compact iff psi = az+b with |a| < 1",
            ))
        }
        _ => Err(out_of_scope(op, pair)),
    }
}

/// Numeric verdict from the criterion functions.
pub fn classify_numeric(op: &OperatorSpec, pair: &SpacePair, spec: &QuadSpec) -> Result<Verdict> {
    let (weight, psi) = Weight::for_operator(op)?;
    let alpha = pair.alpha();
    match (pair.source.p, pair.target.p) {
        (_, Exponent::Infinite) => classify_into_infinity(&weight, &psi, alpha, spec),
        (Exponent::Infinite, Exponent::Finite(p)) => classify_from_infinity(&weight, &psi, alpha, p, spec),
        (Exponent::Finite(s), Exponent::Finite(t)) => {
            if op.kind != OperatorKind::CpsiG {
                return Err(FockError::OutOfScope(format!(
                    "finite exponent pairs are covered for CpsiG only, not {}",
                    op.kind
                )));
            }
            if s <= t {
                classify_cpsig_up(&weight, &psi, alpha, t, spec)
            } else {
                classify_cpsig_down(&weight, &psi, alpha, s, t, spec)
            }
        }
    }
}

/// `sup_z |g′(z)|(1+|z|)^{−1}e^{−α|z|²/2} < ∞`: the image of the constant 1.
pub fn constant_image_bounded(weight: &Weight, alpha: f64, spec: &QuadSpec) -> Result<bool> {
    let Weight::B(g) = weight else { return Ok(true) };
    let shape = LogShape::new().factor(1.0, g.differentiate()).damping(1.0, Poly::identity()).gauss(-0.5 * alpha);
    match sup_plane(&EnvelopedIntegrand::from_shape(shape), spec, FarField::Auto) {
        Ok(_) => Ok(true),
        Err(FockError::Unbounded { .. }) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Maxima of `exp(shape)` over `R ≤ |ψ(z)| ≤ 2R` sampled through preimages.
pub fn annulus_maxima(shape: &LogShape, psi: &Poly, radii: &[f64]) -> Vec<ProfilePoint> {
    const N_ANG: usize = 64;
    const N_RAD: usize = 5;
    radii
        .iter()
        .map(|&big_r| {
            let mut best = f64::NEG_INFINITY;
            for i in 0..N_RAD {
                let rho = big_r * (1.0 + i as f64 / (N_RAD - 1) as f64);
                for j in 0..N_ANG {
                    let w = Complex::from_polar(rho, 2.0 * PI * j as f64 / N_ANG as f64);
                    for z in psi.sub(&Poly::constant(w)).roots() {
                        best = best.max(shape.eval(z));
                    }
                }
            }
            ProfilePoint { radius: big_r, value: best.exp(), log_value: best }
        })
        .collect()
}

/// Whether a profile of maxima tends to zero: monotone decrease over the last
/// four entries, and either a drop below `LIMIT_FRACTION·sup` or a log-log
/// slope of at most `LIMIT_SLOPE` over the last three steps.
pub fn limit_is_zero(profile: &[ProfilePoint], log_sup: f64) -> bool {
    let logs: Vec<f64> = profile.iter().map(|p| p.log_value).collect();
    if logs.iter().all(|&l| l == f64::NEG_INFINITY) {
        return true;
    }
    let n = logs.len();
    let tail = &logs[n.saturating_sub(4)..];
    if !tail.windows(2).all(|w| w[1] <= w[0]) {
        return false;
    }
    let last = logs[n - 1];
    if last == f64::NEG_INFINITY || last < log_sup + LIMIT_FRACTION.ln() {
        return true;
    }
    (n - 3..n).all(|k| {
        let slope = (logs[k] - logs[k - 1]) / (profile[k].radius / profile[k - 1].radius).ln();
        slope <= LIMIT_SLOPE
    })
}

fn classify_into_infinity(weight: &Weight, psi: &Poly, alpha: f64, spec: &QuadSpec) -> Result<Verdict> {
    let kind = weight.pointwise_kind();
    let rule = match kind {
        CriterionKind::Binf => "into F^inf: bounded iff sup B^inf < inf, compact iff B^inf -> 0 as |psi(z)| -> inf",
        CriterionKind::Minf => "into F^inf: bounded iff sup M^inf < inf, compact iff M^inf -> 0 as |psi(z)| -> inf",
        _ => "into F^inf: bounded iff sup |u|e^{(alpha/2)(|psi|^2-|z|^2)} < inf, compact iff it -> 0 as |psi(z)| -> inf",
    };
    let profile = pointwise_profile(weight, psi, alpha, &crate::transforms::linear_radii(20, 1.0));
    let mut evidence = CriterionProfile {
        kind,
        alpha,
        p: None,
        radial_profile: profile,
        verdict_inputs: VerdictInputs::Unbounded { log_value: f64::INFINITY, radius: 0.0 },
    };
    if !constant_image_bounded(weight, alpha, spec)? {
        let mut v = Verdict::new(Tri::No, Tri::No, Method::Numeric, format!("{rule}; the image of f = 1 is not in F^inf"));
        v.evidence = Some(evidence);
        return Ok(v);
    }
    let sup = match criterion_sup(weight, psi, alpha, spec) {
        Ok(s) => s,
        Err(FockError::Unbounded { log_value, radius }) => {
            evidence.verdict_inputs = VerdictInputs::Unbounded { log_value, radius };
            let mut v = Verdict::new(Tri::No, Tri::No, Method::Numeric, rule);
            v.evidence = Some(evidence);
            return Ok(v);
        }
        Err(e) => return Err(e),
    };
    evidence.verdict_inputs = VerdictInputs::Sup {
        sup: sup.sup,
        log_sup: sup.log_sup,
        argmax: sup.argmax,
        attained_inside: sup.attained_inside,
    };
    let (compact, limit_profile) = if psi.is_constant() {
        // |ψ(z)| never tends to infinity
        (true, Vec::new())
    } else {
        let prof = annulus_maxima(&pointwise_shape(weight, psi, alpha), psi, &LIMIT_RADII);
        (limit_is_zero(&prof, sup.log_sup), prof)
    };
    let mut v = Verdict::new(Tri::Yes, Tri::from_bool(compact), Method::Numeric, rule);
    v.evidence = Some(evidence);
    v.limit_profile = limit_profile;
    v.norm_estimate = Some(NormEstimate { power: 1.0, value: sup.sup });
    Ok(v)
}

fn classify_from_infinity(weight: &Weight, psi: &Poly, alpha: f64, p: f64, spec: &QuadSpec) -> Result<Verdict> {
    let params = FockParams::finite(alpha, p)?;
    let kind = weight.integral_kind();
    let rule = match kind {
        CriterionKind::Bp => "from F^inf to F^p: bounded iff compact iff B(|g|^p) is integrable",
        CriterionKind::Mp => "from F^inf to F^p: bounded iff compact iff M(|g|^p) is integrable",
        _ => "from F^inf to F^p: bounded iff compact iff the double kernel integral of |u|^p is finite",
    };
    let mass = total_mass(weight, psi, params, spec)?;
    let (ok, estimate) = match &mass {
        ProbeOutcome::Convergent { value, .. } => (Tri::Yes, Some(NormEstimate { power: p, value: *value })),
        ProbeOutcome::Divergent { .. } => (Tri::No, None),
        ProbeOutcome::Indeterminate { .. } => (Tri::Indeterminate, None),
    };
    let mut v = Verdict::new(ok, ok, Method::Numeric, rule);
    v.evidence = Some(CriterionProfile {
        kind,
        alpha,
        p: Some(p),
        radial_profile: Vec::new(),
        verdict_inputs: VerdictInputs::Mass(mass),
    });
    v.norm_estimate = estimate;
    Ok(v)
}

/// Radii of the w-profile for finite exponent pairs.
pub const W_RADII: [f64; 8] = [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0];

fn w_profile(weight: &Weight, psi: &Poly, params: FockParams, spec: &QuadSpec) -> Result<Vec<ProfilePoint>> {
    crate::transforms::berezin_profile(weight, psi, params, &W_RADII, spec)
}

fn classify_cpsig_up(weight: &Weight, psi: &Poly, alpha: f64, t: f64, spec: &QuadSpec) -> Result<Verdict> {
    let params = FockParams::finite(alpha, t)?;
    let rule = "C_(psi,g) from F^p to F^q, p <= q: bounded iff M(|g|^q) is bounded, compact iff M(|g|^q)(w) -> 0";
    let prof = match w_profile(weight, psi, params, spec) {
        Ok(p) => p,
        Err(FockError::Divergent { .. }) => return Ok(Verdict::new(Tri::No, Tri::No, Method::Numeric, rule)),
        Err(e) => return Err(e),
    };
    let logs: Vec<f64> = prof.iter().map(|p| p.log_value).collect();
    let n = logs.len();
    let log_sup = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let growing = logs[n - 3..].windows(2).all(|w| w[1] > w[0] + 1e-9);
    let bounded = !growing;
    let compact = bounded && limit_is_zero(&prof[1..], log_sup);
    let mut v = Verdict::new(Tri::from_bool(bounded), Tri::from_bool(compact), Method::Numeric, rule);
    v.evidence = Some(CriterionProfile {
        kind: CriterionKind::Mp,
        alpha,
        p: Some(t),
        radial_profile: prof.clone(),
        verdict_inputs: VerdictInputs::Sup {
            sup: log_sup.exp(),
            log_sup,
            argmax: Complex::default(),
            attained_inside: true,
        },
    });
    v.limit_profile = prof;
    if bounded {
        v.norm_estimate = Some(NormEstimate { power: t, value: log_sup.exp() });
    }
    Ok(v)
}

fn classify_cpsig_down(weight: &Weight, psi: &Poly, alpha: f64, s: f64, t: f64, spec: &QuadSpec) -> Result<Verdict> {
    let params = FockParams::finite(alpha, t)?;
    let r = s / (s - t);
    let rule = "C_(psi,g) from F^q to F^p, q > p: bounded iff compact iff M(|g|^p) is in L^{q/(q-p)}";
    // ∫_{|w|<R} M^r over dyadic shells, 4 Gauss–Legendre radii × 16 angles each
    let gl = gauss_legendre(4);
    let edges: Vec<f64> = std::iter::once(0.0).chain(W_RADII[1..].iter().copied()).collect();
    let mut partial = 0.0;
    let mut log_partials = Vec::new();
    for k in 1..edges.len() {
        let (a, b) = (edges[k - 1], edges[k]);
        for (x, wgt) in gl.nodes.iter().zip(&gl.weights) {
            let rho = 0.5 * (a + b) + 0.5 * (b - a) * x;
            let mut ring = 0.0;
            for j in 0..16 {
                let w = Complex::from_polar(rho, 2.0 * PI * (j as f64 + 0.5) / 16.0);
                match berezin(weight, psi, params, w, spec) {
                    Ok(m) => ring += m.value.powf(r),
                    Err(FockError::Divergent { .. }) => {
                        return Ok(Verdict::new(Tri::No, Tri::No, Method::Numeric, rule));
                    }
                    Err(e) => return Err(e),
                }
            }
            partial += 0.5 * (b - a) * wgt * rho * ring * 2.0 * PI / 16.0;
        }
        log_partials.push(partial.ln());
    }
    let outcome = classify_partials(&edges[1..], &log_partials, 1e-6, None);
    let ok = match outcome {
        ProbeOutcome::Convergent { .. } => Tri::Yes,
        ProbeOutcome::Divergent { .. } => Tri::No,
        ProbeOutcome::Indeterminate { .. } => Tri::Indeterminate,
    };
    let estimate = match outcome {
        ProbeOutcome::Convergent { value, .. } => Some(NormEstimate { power: r, value }),
        _ => None,
    };
    let mut v = Verdict::new(ok, ok, Method::Numeric, rule);
    v.evidence = Some(CriterionProfile {
        kind: CriterionKind::Mp,
        alpha,
        p: Some(t),
        radial_profile: Vec::new(),
        verdict_inputs: VerdictInputs::Mass(outcome),
    });
    v.norm_estimate = estimate;
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CrossValidation {
    pub symbolic: Verdict,
    pub numeric: Verdict,
    pub agree: bool,
}

pub fn cross_validate(op: &OperatorSpec, pair: &SpacePair, spec: &QuadSpec) -> Result<CrossValidation> {
    let symbolic = classify_symbolic(op, pair)?;
    let numeric = classify_numeric(op, pair, spec)?;
    let agree = symbolic.bounded == numeric.bounded && symbolic.compact == numeric.compact;
    Ok(CrossValidation { symbolic, numeric, agree })
}
