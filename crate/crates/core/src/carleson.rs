//! (∞,p) Fock–Carleson measures given by densities: lattice coverings,
//! disc masses, t-Berezin transforms and the four quantities whose
//! simultaneous finiteness characterizes the Carleson property.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{FockError, Result};
use crate::quadrature::rules::{gauss_hermite, gauss_legendre, KahanSum};
use crate::quadrature::{
    classify_partials, integrate_disc, integrate_plane, DiscTol, Envelope, EnvelopedIntegrand, LogShape,
    ProbeOutcome, QuadSpec,
};
use crate::symbols::{c, Complex, ExpPoly, Poly};
use crate::transforms::integrate_or_probe;

/// Truncation radii of the partial-quantity ladders.
pub const LADDER: [f64; 5] = [4.0, 8.0, 16.0, 32.0, 64.0];

/// Relative increment below which a ladder counts as converged.
pub const LADDER_REL_TOL: f64 = 1e-6;

/// Lattice spacing as a multiple of the cover radius r.
pub const SPACING_FACTOR: f64 = 0.6;

/// Wire form of a density measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureJson {
    /// `|base(z)|^power · e^{−gauss·|z|²} · (1+|z|)^{−damping}`
    ExppolyPower {
        base: ExpPoly,
        power: f64,
        #[serde(default)]
        gauss: f64,
        #[serde(default)]
        damping: f64,
    },
    /// The pullback `λ_{(p,α)}` for `ψ(w) = aw + b`.
    Pullback {
        g: ExpPoly,
        psi_linear: [[f64; 2]; 2],
        p: f64,
        alpha: f64,
    },
}

/// A nonnegative measure `dμ = density·dm` with the density in log form.
#[derive(Clone, Debug)]
pub struct DensityMeasure {
    pub shape: LogShape,
    pub description: String,
}

impl DensityMeasure {
    pub fn new(shape: LogShape, description: impl Into<String>) -> Self {
        DensityMeasure { shape, description: description.into() }
    }

    pub fn lebesgue() -> Self {
        Self::new(LogShape::new(), "lebesgue")
    }

    /// `e^{−β|z|²}`.
    pub fn gaussian(beta: f64) -> Self {
        Self::new(LogShape::new().gauss(-beta), format!("gaussian(beta={beta})"))
    }

    /// `(1+|z|)^{−e}`.
    pub fn algebraic(e: f64) -> Self {
        Self::new(LogShape::new().damping(e, Poly::identity()), format!("(1+|z|)^-{e}"))
    }

    /// Density `|g′(u)|^p(1+|u|)^{−p}e^{(pα/2)(|z|²−|u|²)}|a|^{−2}`, `u = (z−b)/a`.
    pub fn pullback(g: &ExpPoly, a: Complex, b: Complex, p: f64, alpha: f64) -> Result<Self> {
        if a.norm() == 0.0 {
            return Err(FockError::Parameter("pullback needs an invertible linear psi".into()));
        }
        if !(p > 0.0 && alpha > 0.0) {
            return Err(FockError::Parameter("pullback needs p > 0 and alpha > 0".into()));
        }
        let inv = Poly::linear(a.inv(), -b / a);
        let cc = 0.5 * p * alpha;
        let shape = LogShape::new()
            .factor(p, g.differentiate().compose(&inv))
            .damping(p, inv.clone())
            .gauss(cc)
            .mod_sq(-cc, inv)
            .with_const(-2.0 * a.norm().ln());
        Ok(Self::new(shape, format!("pullback(psi={a}z+{b}, p={p}, alpha={alpha})")))
    }

    pub fn from_json(j: &MeasureJson) -> Result<Self> {
        match j {
            MeasureJson::ExppolyPower { base, power, gauss, damping } => {
                if !power.is_finite() || !gauss.is_finite() || !damping.is_finite() {
                    return Err(FockError::Input("measure parameters must be finite".into()));
                }
                let shape = LogShape::new()
                    .factor(*power, base.clone())
                    .gauss(-gauss)
                    .damping(*damping, Poly::identity());
                Ok(Self::new(shape, format!("|base|^{power} e^(-{gauss}|z|^2) (1+|z|)^-{damping}")))
            }
            MeasureJson::Pullback { g, psi_linear: [a, b], p, alpha } => {
                Self::pullback(g, c(a[0], a[1]), c(b[0], b[1]), *p, *alpha)
            }
        }
    }

    /// `c·μ`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(self.shape.clone().with_const(factor.ln()), format!("{}*{}", factor, self.description))
    }

    pub fn log_density(&self, z: Complex) -> f64 {
        self.shape.eval(z)
    }

    pub fn density(&self, z: Complex) -> f64 {
        self.log_density(z).exp()
    }

    pub fn envelope(&self) -> Option<Envelope> {
        self.shape.envelope()
    }

    pub fn decaying_envelope(&self) -> Option<Envelope> {
        self.envelope().filter(|e| e.decays())
    }

    pub fn integrand(&self) -> EnvelopedIntegrand<'static> {
        EnvelopedIntegrand::from_shape(self.shape.clone())
    }
}

/// Square lattice `z_k = d·(i + j·i)` with `D(z_k, r/2)` covering and
/// `D(z_k, r/4)` pairwise disjoint.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LatticeCovering {
    pub spacing: f64,
    pub cover_radius: f64,
    pub truncation_radius: f64,
    /// Sorted by modulus.
    pub points: Vec<Complex>,
    pub n_max: usize,
}

impl LatticeCovering {
    /// Every sample of modulus at most the truncation radius lies in some `D(z_k, r/2)`.
    pub fn covers(&self, samples: &[Complex]) -> bool {
        let half = 0.5 * self.cover_radius;
        samples
            .iter()
            .filter(|s| s.norm() <= self.truncation_radius)
            .all(|s| self.points.iter().any(|z| (s - z).norm() < half))
    }

    pub fn min_separation(&self) -> f64 {
        let mut best = f64::INFINITY;
        // neighbours on a square lattice are found among nearby indices
        for (i, a) in self.points.iter().enumerate() {
            for b in &self.points[i + 1..] {
                let d = (a - b).norm();
                if d < best {
                    best = d;
                }
            }
            if i > 200 {
                break;
            }
        }
        best
    }

    /// Points with `|z_k| ≤ radius`.
    pub fn within(&self, radius: f64) -> &[Complex] {
        let n = self.points.partition_point(|z| z.norm() <= radius);
        &self.points[..n]
    }
}

/// Largest number of lattice points within distance `< r` of any sample in
/// a fundamental cell of spacing d.
pub fn overlap_count(d: f64, r: f64, samples_per_side: usize) -> usize {
    let w = (r / d).ceil() as i64 + 1;
    let mut best = 0;
    for a in 0..samples_per_side {
        for b in 0..samples_per_side {
            let s = c(d * a as f64 / samples_per_side as f64, d * b as f64 / samples_per_side as f64);
            let mut n = 0;
            for i in -w..=w + 1 {
                for j in -w..=w + 1 {
                    if (s - c(i as f64 * d, j as f64 * d)).norm() < r {
                        n += 1;
                    }
                }
            }
            best = best.max(n);
        }
    }
    best
}

pub fn build_lattice(r: f64, truncation_radius: f64) -> Result<LatticeCovering> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(FockError::Parameter(format!("cover radius must be > 0, got {r}")));
    }
    if !(truncation_radius >= 0.0 && truncation_radius.is_finite()) {
        return Err(FockError::Parameter("truncation radius must be finite and >= 0".into()));
    }
    let d = SPACING_FACTOR * r;
    let reach = truncation_radius + d;
    let n = (reach / d).ceil() as i64;
    let mut points: Vec<Complex> = Vec::new();
    for i in -n..=n {
        for j in -n..=n {
            let z = c(i as f64 * d, j as f64 * d);
            if z.norm() <= reach {
                points.push(z);
            }
        }
    }
    points.sort_by(|a, b| a.norm().total_cmp(&b.norm()).then(a.re.total_cmp(&b.re)).then(a.im.total_cmp(&b.im)));
    Ok(LatticeCovering {
        spacing: d,
        cover_radius: r,
        truncation_radius,
        points,
        n_max: overlap_count(d, r, 40),
    })
}

/// `μ(D(z_k, r))` for all lattice points.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscMasses {
    pub masses: Vec<f64>,
    /// `ln` of the masses (finite even where the masses overflow).
    pub log_masses: Vec<f64>,
    /// `ln Σ masses`.
    pub log_sum: f64,
    /// Bound on the discs outside the truncation, when the density has a decaying envelope.
    pub tail_bound: Option<f64>,
}

/// `ln μ(D(centre, radius))` by a polar Gauss–Legendre × trapezoid rule.
pub fn log_disc_mass(mu: &DensityMeasure, centre: Complex, radius: f64) -> f64 {
    thread_local! {
        static RADIAL: Vec<(f64, f64)> = {
            let r = gauss_legendre(8);
            r.nodes.iter().zip(&r.weights).map(|(x, w)| (0.5 * (x + 1.0), 0.5 * w)).collect()
        };
    }
    const N_ANG: usize = 16;
    RADIAL.with(|radial| {
        let mut logs = Vec::with_capacity(radial.len() * N_ANG);
        for &(x, w) in radial {
            let rho = radius * x;
            for j in 0..N_ANG {
                let z = centre + Complex::from_polar(rho, 2.0 * PI * (j as f64 + 0.5 * x) / N_ANG as f64);
                let l = mu.log_density(z);
                logs.push(l + (w * radius * rho * 2.0 * PI / N_ANG as f64).ln());
            }
        }
        log_sum_exp(&logs)
    })
}

fn log_sum_exp(logs: &[f64]) -> f64 {
    let m = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m.is_infinite() {
        return m;
    }
    let mut s = KahanSum::default();
    for l in logs {
        s.add((l - m).exp());
    }
    m + s.value().ln()
}

pub fn disc_masses(mu: &DensityMeasure, lat: &LatticeCovering) -> DiscMasses {
    let r = lat.cover_radius;
    let log_masses: Vec<f64> = lat.points.par_iter().map(|&z| log_disc_mass(mu, z, r)).collect();
    let masses = log_masses.iter().map(|l| l.exp()).collect();
    let log_sum = log_sum_exp(&log_masses);
    // outside the truncation every point is in at most N_max discs
    let tail_bound = mu.decaying_envelope().and_then(|env| {
        let inner = (lat.truncation_radius - r).max(0.0);
        (inner >= env.r0).then(|| lat.n_max as f64 * env.log_tail(inner).exp())
    });
    DiscMasses { masses, log_masses, log_sum, tail_bound }
}

/// `μ̃_{(t,α)}(w) = ∫ e^{−(αt/2)|z−w|²} dμ(z)` by plane quadrature.
pub fn t_berezin(mu: &DensityMeasure, t: f64, alpha: f64, w: Complex, spec: &QuadSpec) -> Result<f64> {
    if !(t > 0.0 && alpha > 0.0) {
        return Err(FockError::Parameter("t and alpha must be > 0".into()));
    }
    let shape = mu.shape.clone().mod_sq(-0.5 * alpha * t, Poly::identity().sub(&Poly::constant(w)));
    match integrate_or_probe(&EnvelopedIntegrand::from_shape(shape), spec)? {
        ProbeOutcome::Convergent { value, .. } => Ok(value),
        ProbeOutcome::Divergent { growth_exponent, .. } => Err(FockError::Divergent { growth_exponent }),
        ProbeOutcome::Indeterminate { log_partials } => Err(FockError::Indeterminate(format!("{log_partials:?}"))),
    }
}

/// `ln μ̃_{(t,α)}(w)` by an n×n Gauss–Hermite product rule; accurate for
/// densities that are smooth on the scale `(αt/2)^{−1/2}`.
pub fn log_t_berezin_gh(mu: &DensityMeasure, t: f64, alpha: f64, w: Complex, rule: &[(f64, f64)]) -> f64 {
    let cc = 0.5 * alpha * t;
    let s = 1.0 / cc.sqrt();
    let mut logs = Vec::with_capacity(rule.len() * rule.len());
    for &(x, wx) in rule {
        for &(y, wy) in rule {
            logs.push((wx * wy).ln() + mu.log_density(w + c(x * s, y * s)));
        }
    }
    log_sum_exp(&logs) - cc.ln()
}

fn hermite_pairs(n: usize) -> Vec<(f64, f64)> {
    let r = gauss_hermite(n);
    r.nodes.into_iter().zip(r.weights).collect()
}

/// `∫ μ̃_{(t,α)} dm` by outer polar quadrature over inner Gauss–Hermite
/// cubature, for densities with a decaying envelope. Returns the value and a
/// bound on the truncated tail.
pub fn t_berezin_total_direct(mu: &DensityMeasure, t: f64, alpha: f64, spec: &QuadSpec) -> Result<(f64, f64)> {
    let env = mu
        .decaying_envelope()
        .ok_or_else(|| FockError::Envelope("direct t-Berezin total needs a decaying density".into()))?;
    if env.log_c == f64::NEG_INFINITY {
        return Ok((0.0, 0.0));
    }
    let cc = 0.5 * alpha * t;
    let mass = integrate_plane(&mu.integrand(), spec)?.value;
    let r_mu = env.radius_for_tail((1e-14 * mass).ln()).max(env.r0);
    let r_out = r_mu + (40.0 / cc).sqrt();
    let rule = hermite_pairs(24);
    let sampler = |w: Complex| (log_t_berezin_gh(mu, t, alpha, w, &rule), [1.0]);
    let d = integrate_disc(&sampler, r_out, spec.base_rings, DiscTol { rel: 0.2 * spec.rel_tol, abs: 0.0 });
    // mass inside r_mu spills past r_out with Gaussian weight; mass outside is at most the tail
    let tail = PI / cc * (env.log_tail(r_mu).exp() + mass * (-cc * (r_out - r_mu).powi(2)).exp());
    Ok((d.values[0], tail + d.errors[0]))
}

/// Area of `D(z, r) ∩ D(0, R)` for `|z| = s`.
pub fn lens_area(s: f64, r: f64, big_r: f64) -> f64 {
    let (small, large) = if r <= big_r { (r, big_r) } else { (big_r, r) };
    if s >= r + big_r {
        return 0.0;
    }
    if s <= large - small {
        return PI * small * small;
    }
    // half-angles from the height of the triangle (s, r, R), as two circular segments
    let k = ((-s + r + big_r) * (s + r - big_r) * (s - r + big_r) * (s + r + big_r)).max(0.0);
    let h = 0.5 * k.sqrt() / s;
    let a1 = h.atan2((s * s + r * r - big_r * big_r) / (2.0 * s));
    let a2 = h.atan2((s * s + big_r * big_r - r * r) / (2.0 * s));
    r * r * segment(a1) + big_r * big_r * segment(a2)
}

/// `a − sin a·cos a`: the area of a unit-radius circular segment of half-angle `a`.
fn segment(a: f64) -> f64 {
    if a < 0.2 {
        // (x − sin x)/2 with x = 2a
        let x = 2.0 * a;
        let x2 = x * x;
        let series = 1.0 / 12.0
            - x2 * (1.0 / 240.0 - x2 * (1.0 / 10_080.0 - x2 * (1.0 / 725_760.0 - x2 * (1.0 / 79_833_600.0 - x2 / 12_454_041_600.0))));
        x * x2 * series
    } else {
        a - a.sin() * a.cos()
    }
}

/// One of the four Carleson quantities with its ladder of partials.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Quantity {
    pub outcome: ProbeOutcome,
    pub radii: Vec<f64>,
    pub log_partials: Vec<f64>,
}

impl Quantity {
    fn from_ladder(radii: &[f64], log_partials: Vec<f64>, tail_bound: Option<f64>) -> Self {
        let outcome = classify_partials(radii, &log_partials, LADDER_REL_TOL, tail_bound);
        Quantity { outcome, radii: radii.to_vec(), log_partials }
    }

    pub fn finite_value(&self) -> Option<f64> {
        match self.outcome {
            ProbeOutcome::Convergent { value, .. } => Some(value),
            _ => None,
        }
    }
}

const DISC_TOL: DiscTol = DiscTol { rel: 1e-8, abs: 0.0 };

/// `μ(D(0,R))` along the ladder.
pub fn mass_ladder(mu: &DensityMeasure, radii: &[f64], spec: &QuadSpec) -> Quantity {
    let sampler = |z: Complex| (mu.log_density(z), [1.0]);
    let logs = radii.iter().map(|&r| integrate_disc(&sampler, r, spec.base_rings, DISC_TOL).log_value(0)).collect();
    let tail = mu.decaying_envelope().map(|e| e.log_tail(radii[radii.len() - 1].max(e.r0)).exp());
    Quantity::from_ladder(radii, logs, tail)
}

/// `∫ e^{−|w|²/R²} μ̃_{(t,α)}(w) dm(w)` along the ladder. The inner Gaussian
/// integral in w is done in closed form, leaving
/// `∫ μ(z)·(π/(ε+c))·e^{−εc|z|²/(ε+c)} dm(z)` with `ε = R^{−2}`, `c = αt/2`.
pub fn berezin_ladder(mu: &DensityMeasure, t: f64, alpha: f64, radii: &[f64], spec: &QuadSpec) -> Quantity {
    let cc = 0.5 * alpha * t;
    let logs = radii
        .iter()
        .map(|&big_r| {
            let eps = 1.0 / (big_r * big_r);
            let shape = mu
                .shape
                .clone()
                .gauss(-eps * cc / (eps + cc))
                .with_const((PI / (eps + cc)).ln());
            let trunc = match shape.envelope().filter(|e| e.decays()) {
                Some(env) if env.log_c > f64::NEG_INFINITY => {
                    let peak = shape.eval(Complex::default()).max(shape.log_const);
                    env.radius_for_tail(peak - 40.0).max(env.r0)
                }
                Some(_) => return f64::NEG_INFINITY,
                None => 4.0 * big_r,
            };
            let sampler = |z: Complex| (shape.eval(z), [1.0]);
            integrate_disc(&sampler, trunc, spec.base_rings, DISC_TOL).log_value(0)
        })
        .collect();
    Quantity::from_ladder(radii, logs, None)
}

/// `∫_{|w|<R} μ(D(w,r)) dm(w) = ∫ μ(z)·|D(z,r) ∩ D(0,R)| dm(z)` along the ladder.
pub fn disc_average_ladder(mu: &DensityMeasure, r: f64, radii: &[f64], spec: &QuadSpec) -> Quantity {
    let logs = radii
        .iter()
        .map(|&big_r| {
            let sampler = |z: Complex| (mu.log_density(z) + lens_area(z.norm(), r, big_r).ln(), [1.0]);
            integrate_disc(&sampler, big_r + r, spec.base_rings, DISC_TOL).log_value(0)
        })
        .collect();
    Quantity::from_ladder(radii, logs, None)
}

/// `Σ_{|z_k|≤R} μ(D(z_k,r))` along the ladder.
pub fn lattice_ladder(mu: &DensityMeasure, lat: &LatticeCovering, radii: &[f64]) -> Quantity {
    let masses = disc_masses(mu, lat);
    let logs = radii
        .iter()
        .map(|&big_r| {
            let n = lat.within(big_r).len();
            log_sum_exp(&masses.log_masses[..n])
        })
        .collect();
    Quantity::from_ladder(radii, logs, masses.tail_bound)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CarlesonVerdict {
    Carleson,
    NotCarleson,
    /// Some quantities converged and others did not, or a ladder was indeterminate.
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CarlesonReport {
    pub verdict: CarlesonVerdict,
    pub p: f64,
    pub alpha: f64,
    pub t: f64,
    pub r: f64,
    pub description: String,
    /// `μ(ℂ)`, `∫μ̃_t dm`, `∫μ(D(·,r)) dm`, `Σμ(D(z_k,r))`.
    pub quantities: BTreeMap<String, Quantity>,
    /// Pairwise ratios of the finite quantities.
    pub ratios: BTreeMap<String, f64>,
    pub anchor: String,
}

pub const QUANTITY_NAMES: [&str; 4] = ["total_mass", "berezin_integral", "disc_average_integral", "lattice_sum"];

pub fn carleson_verdict(mu: &DensityMeasure, p: f64, alpha: f64, t: f64, r: f64, spec: &QuadSpec) -> Result<CarlesonReport> {
    for (name, v) in [("p", p), ("alpha", alpha), ("t", t), ("r", r)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(FockError::Parameter(format!("{name} must be > 0, got {v}")));
        }
    }
    spec.validate()?;
    let lat = build_lattice(r, LADDER[LADDER.len() - 1])?;
    let qs = [
        mass_ladder(mu, &LADDER, spec),
        berezin_ladder(mu, t, alpha, &LADDER, spec),
        disc_average_ladder(mu, r, &LADDER, spec),
        lattice_ladder(mu, &lat, &LADDER),
    ];
    let finite: Vec<bool> = qs.iter().map(|q| matches!(q.outcome, ProbeOutcome::Convergent { .. })).collect();
    let divergent: Vec<bool> = qs.iter().map(|q| q.outcome.is_divergent()).collect();
    let verdict = if finite.iter().all(|&f| f) {
        CarlesonVerdict::Carleson
    } else if divergent.iter().all(|&d| d) {
        CarlesonVerdict::NotCarleson
    } else {
        CarlesonVerdict::Inconclusive
    };
    let mut ratios = BTreeMap::new();
    for i in 0..4 {
        for j in i + 1..4 {
            if let (Some(a), Some(b)) = (qs[i].finite_value(), qs[j].finite_value()) {
                if b > 0.0 {
                    ratios.insert(format!("{}/{}", QUANTITY_NAMES[i], QUANTITY_NAMES[j]), a / b);
                }
            }
        }
    }
    let quantities = QUANTITY_NAMES.iter().map(|s| s.to_string()).zip(qs).collect();
    Ok(CarlesonReport {
        verdict,
        p,
        alpha,
        t,
        r,
        description: mu.description.clone(),
        quantities,
        ratios,
        anchor: "(inf,p) Fock-Carleson: finite mass <=> integrable t-Berezin transform <=> integrable disc averages <=> summable lattice disc masses".into(),
    })
}

/// Two-sided estimate of `‖I_μ‖^p` for the embedding `F_α^∞ → L^p(μ)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EmbeddingBounds {
    /// `max_w ∫|k_w|^p e^{−pα|z|²/2} dμ` over the lattice, normalized kernels having unit sup norm.
    pub lower: f64,
    pub lower_at: Complex,
    /// `Σμ(D(z_k,r))` plus its tail bound; the discs cover ℂ and
    /// `|f(z)|e^{−α|z|²/2} ≤ ‖f‖_∞`.
    pub upper: f64,
}

pub fn embedding_norm_bounds(mu: &DensityMeasure, p: f64, alpha: f64, lat: &LatticeCovering, spec: &QuadSpec) -> Result<EmbeddingBounds> {
    if !(p > 0.0 && alpha > 0.0) {
        return Err(FockError::Parameter("p and alpha must be > 0".into()));
    }
    let env = mu
        .decaying_envelope()
        .ok_or_else(|| FockError::Input("embedding bounds need a density with a decaying envelope".into()))?;
    if env.log_c == f64::NEG_INFINITY || mu.shape.is_identically_zero() {
        return Ok(EmbeddingBounds { lower: 0.0, lower_at: Complex::default(), upper: 0.0 });
    }
    let masses = disc_masses(mu, lat);
    let tail = masses
        .tail_bound
        .ok_or_else(|| FockError::Input("lattice truncation is inside the envelope radius".into()))?;
    let upper = masses.log_sum.exp() + tail;
    // |k_w(z)|^p e^{−pα|z|²/2} = e^{−(pα/2)|z−w|²}: the t-Berezin transform at t = p
    let rule = hermite_pairs(12);
    let mut scored: Vec<(f64, usize)> = lat
        .points
        .par_iter()
        .map(|&w| log_t_berezin_gh(mu, p, alpha, w, &rule))
        .collect::<Vec<_>>()
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, i))
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut lower = (0.0, Complex::default());
    for &(_, i) in scored.iter().take(3) {
        let w = lat.points[i];
        let v = t_berezin(mu, p, alpha, w, spec)?;
        if v > lower.0 {
            lower = (v, w);
        }
    }
    Ok(EmbeddingBounds { lower: lower.0, lower_at: lower.1, upper })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn lattice_properties() {
        let lat = build_lattice(1.0, 5.0).unwrap();
        let mut samples = Vec::new();
        for i in -50..=50 {
            for j in -50..=50 {
                samples.push(c(0.1 * i as f64, 0.1 * j as f64));
            }
        }
        assert!(lat.covers(&samples));
        assert!(lat.min_separation() >= 0.5 - 1e-12);
        // brute-force count over a fine grid of the plane region
        let mut brute = 0;
        for s in &samples {
            if s.norm() <= 3.0 {
                brute = brute.max(lat.points.iter().filter(|z| (s - *z).norm() < 1.0).count());
            }
        }
        assert!(lat.n_max >= brute);
        assert!(lat.n_max <= 16);
        assert!(build_lattice(0.0, 5.0).is_err());
    }

    #[test]
    fn lens_area_limits() {
        assert!((lens_area(0.0, 1.0, 5.0) - PI).abs() < 1e-14);
        assert_eq!(lens_area(6.5, 1.0, 5.0), 0.0);
        // half-overlap symmetric case s = R: compare with a midpoint count
        let (s, r, big) = (5.0, 1.0, 5.0);
        let h = 0.002;
        let mut count = 0usize;
        let n = (2.0 / h) as i64;
        for i in 0..n {
            for j in 0..n {
                let p = c(s - 1.0 + (i as f64 + 0.5) * h, -1.0 + (j as f64 + 0.5) * h);
                if (p - c(s, 0.0)).norm() < r && p.norm() < big {
                    count += 1;
                }
            }
        }
        assert!(rel(lens_area(s, r, big), count as f64 * h * h) < 1e-3);
    }

    #[test]
    fn lens_area_near_tangency() {
        let (r, big) = (1.0f64, 32.0f64);
        let rho = r * big / (r + big);
        for k in 4..=12 {
            let s = r + big - 10f64.powi(-k);
            let delta = r + big - s;
            let leading = 4.0 / 3.0 * (2.0 * rho).sqrt() * delta.powf(1.5);
            assert!(rel(lens_area(s, r, big), leading) < 10.0 * delta, "delta = {delta}");
        }
        assert!((segment(0.2 - 1e-15) - segment(0.2 + 1e-15)).abs() < 1e-15);
    }

    #[test]
    fn disc_masses_examples() {
        let lat = build_lattice(1.0, 6.0).unwrap();
        let leb = disc_masses(&DensityMeasure::lebesgue(), &lat);
        assert!(leb.masses.iter().all(|m| rel(*m, PI) < 1e-12));
        assert!(leb.tail_bound.is_none());
        let g = disc_masses(&DensityMeasure::gaussian(1.0), &lat);
        let sum = g.log_sum.exp();
        assert!(sum >= PI * (1.0 - 1e-6) && sum <= lat.n_max as f64 * PI);
        assert!(g.tail_bound.unwrap() < 1e-6);
        let zero = DensityMeasure::new(LogShape::constant(f64::NEG_INFINITY), "zero");
        assert!(disc_masses(&zero, &lat).masses.iter().all(|&m| m == 0.0));
    }

    #[test]
    fn t_berezin_examples() {
        let spec = QuadSpec::default();
        let leb = t_berezin(&DensityMeasure::lebesgue(), 1.0, 1.0, c(3.0, -2.0), &spec).unwrap();
        assert!(rel(leb, 2.0 * PI) < 1e-8);
        // narrow Gaussian of unit mass at the origin
        let sigma: f64 = 1e-3;
        let point = DensityMeasure::new(LogShape::new().gauss(-1.0 / (sigma * sigma)).with_const(-(PI * sigma * sigma).ln()), "point");
        for w in [c(0.5, 0.0), c(1.0, 1.0)] {
            let v = t_berezin(&point, 2.0, 1.0, w, &spec).unwrap();
            assert!(rel(v, (-w.norm_sqr()).exp()) < 1e-5, "{v}");
        }
    }

    #[test]
    fn t_berezin_total_matches_mass() {
        let spec = QuadSpec::default();
        let mu = DensityMeasure::gaussian(1.0);
        let (v, err) = t_berezin_total_direct(&mu, 1.0, 1.0, &spec).unwrap();
        assert!(rel(v, 2.0 * PI * PI) < 1e-6, "{v} ± {err}");
        let rule = hermite_pairs(24);
        let gh = log_t_berezin_gh(&mu, 1.0, 1.0, c(0.7, 0.2), &rule).exp();
        let plane = t_berezin(&mu, 1.0, 1.0, c(0.7, 0.2), &spec).unwrap();
        // (π/(3/2))·e^{−|w|²/3}
        let exact = PI / 1.5 * (-c(0.7, 0.2).norm_sqr() / 3.0).exp();
        assert!(rel(plane, exact) < 1e-9);
        assert!(rel(gh, exact) < 1e-7, "{gh} vs {exact}");
    }

    #[test]
    fn verdicts() {
        let spec = QuadSpec::default();
        let g = carleson_verdict(&DensityMeasure::gaussian(1.0), 2.0, 1.0, 1.0, 1.0, &spec).unwrap();
        assert_eq!(g.verdict, CarlesonVerdict::Carleson, "{g:#?}");
        assert!(g.ratios.values().all(|r| (1e-3..=1e3).contains(r)));
        let l = carleson_verdict(&DensityMeasure::lebesgue(), 2.0, 1.0, 1.0, 1.0, &spec).unwrap();
        assert_eq!(l.verdict, CarlesonVerdict::NotCarleson, "{l:#?}");
        let pb = DensityMeasure::pullback(&ExpPoly::poly(Poly::identity()), c(0.5, 0.0), c(0.0, 0.0), 3.0, 1.0).unwrap();
        let v = carleson_verdict(&pb, 3.0, 1.0, 1.0, 1.0, &spec).unwrap();
        assert_eq!(v.verdict, CarlesonVerdict::Carleson, "{v:#?}");
    }

    #[test]
    fn embedding_bounds() {
        let spec = QuadSpec::default();
        let lat = build_lattice(1.0, 10.0).unwrap();
        let zero = DensityMeasure::new(LogShape::constant(f64::NEG_INFINITY), "zero");
        let z = embedding_norm_bounds(&zero, 2.0, 1.0, &lat, &spec).unwrap();
        assert_eq!((z.lower, z.upper), (0.0, 0.0));
        let mu = DensityMeasure::gaussian(1.0);
        let b = embedding_norm_bounds(&mu, 2.0, 1.0, &lat, &spec).unwrap();
        assert!(b.lower > 0.0 && b.lower <= b.upper, "{b:?}");
        let b2 = embedding_norm_bounds(&mu.scaled(2.0), 2.0, 1.0, &lat, &spec).unwrap();
        assert!(rel(b2.lower, 2.0 * b.lower) < 1e-12 && rel(b2.upper, 2.0 * b.upper) < 1e-12);
    }

    #[test]
    fn measure_json() {
        let j: MeasureJson = serde_json::from_str(r#"{"kind":"exppoly_power","base":{"p":[[1,0]]},"power":1,"gauss":1}"#).unwrap();
        let mu = DensityMeasure::from_json(&j).unwrap();
        assert!((mu.density(c(1.0, 1.0)) - (-2f64).exp()).abs() < 1e-15);
        let j: MeasureJson =
            serde_json::from_str(r#"{"kind":"pullback","g":{"p":[[0,0],[1,0]]},"psi_linear":[[0.5,0],[0,0]],"p":3,"alpha":1}"#).unwrap();
        let mu = DensityMeasure::from_json(&j).unwrap();
        // u = 2z: 4·(1+2|z|)^{−3}·e^{(3/2)(|z|²−4|z|²)}
        let z = c(0.3, 0.4);
        let expect = 4.0 * (1.0 + 1.0f64).powi(-3) * (1.5f64 * (0.25 - 1.0)).exp();
        assert!(rel(mu.density(z), expect) < 1e-13);
    }
}
