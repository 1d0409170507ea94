//! Certified integration and supremum search over the complex plane.
//!
//! Plane integrals are computed on nested polar rings: trapezoid in angle
//! (spectrally accurate for smooth periodic data) and adaptive Gauss–Legendre
//! bisection in radius. The disc is truncated at a radius where the
//! integrand's [`Envelope`] tail, integrated in closed form, is below the
//! requested tolerance; that tail is part of the reported error bound.
//!
//! Integrands are handed over in the log domain and exponentiated against a
//! common shift, so magnitudes like `e^{α|z|²/2}` never overflow.

mod envelope;
pub mod rules;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

pub use envelope::{Envelope, LogShape};
use rules::{gl7, gl8, KahanSum};

use crate::error::{FockError, Result};
use crate::symbols::Complex;

/// Log-values above this are treated as numerically unbounded.
pub const LOG_OVERFLOW: f64 = 690.0;

/// Increment-decay exponent separating convergent from divergent partial
/// integrals in [`divergence_probe`].
pub const DIVERGENCE_SLOPE: f64 = -0.2;

/// Increment-decay exponents below this are reported as logarithmic growth.
pub const LOGARITHMIC_SLOPE: f64 = 0.5;

/// Quadrature settings.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_radius: f64,
    pub base_rings: usize,
}

impl Default for QuadSpec {
    fn default() -> Self {
        QuadSpec {
            rel_tol: 1e-8,
            abs_tol: 1e-12,
            max_radius: 40.0,
            base_rings: 64,
        }
    }
}

impl QuadSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(FockError::Parameter("tolerances must be > 0".into()));
        }
        if !(self.max_radius >= 1.0) {
            return Err(FockError::Parameter("max_radius must be >= 1".into()));
        }
        if self.base_rings == 0 {
            return Err(FockError::Parameter("base_rings must be >= 1".into()));
        }
        Ok(())
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }

    pub fn with_max_radius(mut self, max_radius: f64) -> Self {
        self.max_radius = max_radius;
        self
    }
}

type LogFn<'a> = dyn Fn(Complex) -> f64 + Sync + 'a;

/// A nonnegative integrand given by `ln F`, with an optional tail envelope.
pub struct EnvelopedIntegrand<'a> {
    log_eval: Box<LogFn<'a>>,
    envelope: Option<Envelope>,
}

impl<'a> EnvelopedIntegrand<'a> {
    pub fn new(log_eval: impl Fn(Complex) -> f64 + Sync + 'a, envelope: Option<Envelope>) -> Self {
        EnvelopedIntegrand {
            log_eval: Box::new(log_eval),
            envelope,
        }
    }

    pub fn from_shape(shape: LogShape) -> EnvelopedIntegrand<'static> {
        let envelope = shape.envelope();
        EnvelopedIntegrand {
            log_eval: Box::new(move |z| shape.eval(z)),
            envelope,
        }
    }

    pub fn log_eval(&self, z: Complex) -> f64 {
        (self.log_eval)(z)
    }

    pub fn eval(&self, z: Complex) -> f64 {
        self.log_eval(z).exp()
    }

    pub fn envelope(&self) -> Option<&Envelope> {
        self.envelope.as_ref()
    }

    /// Samples `|z| ∈ [r0, 4r0]` and reports the first point where the
    /// integrand exceeds its envelope.
    pub fn check_envelope(&self) -> std::result::Result<(), Complex> {
        let Some(env) = self.envelope else { return Ok(()) };
        let r0 = env.r0.max(1.0);
        for i in 0..12 {
            let rho = r0 * (1.0 + 3.0 * i as f64 / 11.0);
            for j in 0..24 {
                let z = Complex::from_polar(rho, 2.0 * PI * (j as f64 + 0.37) / 24.0);
                let bound = env.log_bound(rho);
                if self.log_eval(z) > bound + 1e-9 * (1.0 + bound.abs()) {
                    return Err(z);
                }
            }
        }
        Ok(())
    }
}

/// Result of a plane integral.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PlaneIntegral {
    pub value: f64,
    pub error_bound: f64,
    /// Truncation radius actually used.
    pub radius: f64,
}

/// Integrates a nonnegative integrand with a decaying envelope over ℂ.
pub fn integrate_plane(f: &EnvelopedIntegrand<'_>, spec: &QuadSpec) -> Result<PlaneIntegral> {
    let env = *f
        .envelope()
        .ok_or_else(|| FockError::Envelope("integrand has no envelope".into()))?;
    if !env.decays() {
        return Err(FockError::Envelope(format!("envelope beta = {} <= 0", env.beta)));
    }
    if let Err(z) = f.check_envelope() {
        return Err(FockError::Envelope(format!("envelope violated at z = {z}")));
    }
    let sampler = |z: Complex| (f.log_eval(z), [1.0]);
    let [r] = integrate_enveloped(&sampler, &env, spec)?;
    Ok(r)
}

/// Shared driver: chooses the truncation radius from the envelope and runs
/// the disc integrator with K accumulators.
pub(crate) fn integrate_enveloped<const K: usize, F>(
    f: &F,
    env: &Envelope,
    spec: &QuadSpec,
) -> Result<[PlaneIntegral; K]>
where
    F: Fn(Complex) -> (f64, [f64; K]) + Sync,
{
    spec.validate()?;
    if env.log_c == f64::NEG_INFINITY {
        return Ok([PlaneIntegral { value: 0.0, error_bound: 0.0, radius: 0.0 }; K]);
    }
    let r_cap = spec.max_radius.max(env.r0);
    // coarse pass for the scale of the integral
    let r1 = env.radius_for_tail((0.1 * spec.abs_tol).ln()).clamp(env.r0, r_cap);
    let coarse_tol = DiscTol { rel: 1e-3, abs: spec.abs_tol };
    let coarse = integrate_disc(f, r1, spec.base_rings, coarse_tol);
    let scale = coarse.total_mass();
    let target = 1e-3 * (spec.abs_tol + spec.rel_tol * scale);
    let radius = env.radius_for_tail(target.ln()).clamp(env.r0, r_cap);
    let fine_tol = DiscTol { rel: 0.2 * spec.rel_tol, abs: 0.2 * spec.abs_tol };
    let fine = integrate_disc(f, radius, spec.base_rings, fine_tol);
    let tail = env.log_tail(radius).exp();
    if !fine.converged {
        let estimate = fine.values[0];
        return Err(FockError::Accuracy {
            estimate,
            error_bound: fine.errors[0] + tail,
        });
    }
    let mut out = [PlaneIntegral { value: 0.0, error_bound: 0.0, radius }; K];
    for k in 0..K {
        out[k].value = fine.values[k];
        out[k].error_bound = fine.errors[k] + tail;
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct DiscTol {
    pub rel: f64,
    pub abs: f64,
}

#[derive(Clone, Debug)]
pub(crate) struct DiscResult<const K: usize> {
    pub values: [f64; K],
    /// Sums before multiplying back `e^{log_peak}`.
    pub raw: [f64; K],
    pub errors: [f64; K],
    /// `ln` of the largest sampled value (the exponent shift used).
    pub log_peak: f64,
    pub converged: bool,
}

impl<const K: usize> DiscResult<K> {
    /// `ln` of accumulator k without overflow.
    pub fn log_value(&self, k: usize) -> f64 {
        if self.raw[k] > 0.0 {
            self.raw[k].ln() + self.log_peak
        } else {
            f64::NEG_INFINITY
        }
    }

    fn total_mass(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).sum()
    }
}

const MAX_DEPTH: usize = 36;
const MAX_ANGULAR: usize = 1 << 16;
/// Ring contributions below this, relative to the peak sample, are not refined further.
const RING_ABS: f64 = 1e-18;

/// Integral of `exp(ln F)·weights` over the disc `|z| < radius`.
///
/// Radial panels are processed in parallel and reduced in index order, so
/// the result does not depend on scheduling.
pub(crate) fn integrate_disc<const K: usize, F>(
    f: &F,
    radius: f64,
    base_rings: usize,
    tol: DiscTol,
) -> DiscResult<K>
where
    F: Fn(Complex) -> (f64, [f64; K]) + Sync,
{
    let n_panels = base_rings.max(1);
    let h = radius / n_panels as f64;
    let shift = scan_log_peak(f, radius, n_panels);
    if shift == f64::NEG_INFINITY || radius <= 0.0 {
        return DiscResult {
            values: [0.0; K],
            raw: [0.0; K],
            errors: [0.0; K],
            log_peak: f64::NEG_INFINITY,
            converged: true,
        };
    }
    // ln F carries an absolute error proportional to its size
    let noise = (16.0 * f64::EPSILON * (1.0 + shift.abs())).max(1e-13);
    let ring_rel = (0.1 * tol.rel).max(noise);
    let ring = |r: f64| ring_integral(f, r, shift, ring_rel);
    let panel_whole: Vec<[f64; K]> = (0..n_panels)
        .into_par_iter()
        .map(|i| gl_panel(&ring, i as f64 * h, (i + 1) as f64 * h))
        .collect();
    let coarse_mass: f64 = panel_whole.iter().map(|v| v.iter().map(|x| x.abs()).sum::<f64>()).sum();
    let abs_scaled = tol.abs * (-shift).exp();
    let total_tol = tol.rel * coarse_mass + abs_scaled;

    let results: Vec<([f64; K], [f64; K], bool)> = panel_whole
        .into_par_iter()
        .enumerate()
        .map(|(i, whole)| {
            let (a, b) = (i as f64 * h, (i + 1) as f64 * h);
            adapt_panel(&ring, a, b, whole, total_tol * h / radius, ring_rel, 0)
        })
        .collect();

    let scale = shift.exp();
    let mut values = [0.0; K];
    let mut raw = [0.0; K];
    let mut errors = [0.0; K];
    let mut converged = true;
    for k in 0..K {
        let mut vs = KahanSum::default();
        let mut es = KahanSum::default();
        for (v, e, ok) in &results {
            vs.add(v[k]);
            es.add(e[k]);
            converged &= *ok;
        }
        raw[k] = vs.value();
        values[k] = raw[k] * scale;
        errors[k] = es.value() * scale;
    }
    DiscResult {
        values,
        raw,
        errors,
        log_peak: shift,
        converged,
    }
}

fn scan_log_peak<const K: usize, F>(f: &F, radius: f64, n_rings: usize) -> f64
where
    F: Fn(Complex) -> (f64, [f64; K]) + Sync,
{
    let n_rings = n_rings.max(8);
    (0..=n_rings)
        .into_par_iter()
        .map(|i| {
            let r = radius * i as f64 / n_rings as f64;
            let n_ang = if i == 0 { 1 } else { 64 };
            (0..n_ang)
                .map(|j| f(Complex::from_polar(r, 2.0 * PI * (j as f64 + 0.5) / n_ang as f64)).0)
                .fold(f64::NEG_INFINITY, f64::max)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `r·∫₀^{2π} F(re^{iθ}) dθ`, trapezoid with doubling until converged.
fn ring_integral<const K: usize, F>(f: &F, r: f64, shift: f64, rel: f64) -> [f64; K]
where
    F: Fn(Complex) -> (f64, [f64; K]) + Sync,
{
    if r == 0.0 {
        return [0.0; K];
    }
    let sample = |theta: f64| {
        let (l, w) = f(Complex::from_polar(r, theta));
        let m = (l - shift).exp();
        let mut out = [0.0; K];
        if m > 0.0 {
            for k in 0..K {
                out[k] = m * w[k];
            }
        }
        out
    };
    // arc-length balanced starting count
    let mut n = (32 + 4 * r.ceil() as usize).min(2048).next_power_of_two();
    let mut even = [0.0; K];
    for j in 0..n / 2 {
        let s = sample(2.0 * PI * (2 * j) as f64 / n as f64);
        for k in 0..K {
            even[k] += s[k];
        }
    }
    let mut odd = [0.0; K];
    for j in 0..n / 2 {
        let s = sample(2.0 * PI * (2 * j + 1) as f64 / n as f64);
        for k in 0..K {
            odd[k] += s[k];
        }
    }
    loop {
        let coarse: Vec<f64> = (0..K).map(|k| even[k] * 2.0 / n as f64).collect();
        let fine: Vec<f64> = (0..K).map(|k| (even[k] + odd[k]) / n as f64).collect();
        let diff: f64 = (0..K).map(|k| (fine[k] - coarse[k]).abs()).sum();
        let mass: f64 = fine.iter().map(|x| x.abs()).sum();
        if diff <= rel * mass || 2.0 * PI * r * diff <= RING_ABS || n >= MAX_ANGULAR {
            let mut out = [0.0; K];
            for k in 0..K {
                out[k] = 2.0 * PI * r * fine[k];
            }
            return out;
        }
        // double: the current nodes become the even set
        for k in 0..K {
            even[k] += odd[k];
            odd[k] = 0.0;
        }
        let n2 = 2 * n;
        for j in 0..n {
            let s = sample(2.0 * PI * (2 * j + 1) as f64 / n2 as f64);
            for k in 0..K {
                odd[k] += s[k];
            }
        }
        n = n2;
    }
}

fn gl_panel<const K: usize>(ring: &impl Fn(f64) -> [f64; K], a: f64, b: f64) -> [f64; K] {
    let rule = gl7();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut out = [0.0; K];
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let v = ring(mid + half * x);
        for k in 0..K {
            out[k] += w * half * v[k];
        }
    }
    out
}

fn adapt_panel<const K: usize>(
    ring: &impl Fn(f64) -> [f64; K],
    a: f64,
    b: f64,
    whole: [f64; K],
    tol: f64,
    noise: f64,
    depth: usize,
) -> ([f64; K], [f64; K], bool) {
    let m = 0.5 * (a + b);
    let left = gl_panel(ring, a, m);
    let right = gl_panel(ring, m, b);
    let mut split = [0.0; K];
    let mut diff = 0.0;
    let mut mass = 0.0;
    for k in 0..K {
        split[k] = left[k] + right[k];
        diff += (split[k] - whole[k]).abs();
        mass += left[k].abs() + right[k].abs();
    }
    // differences below the ring accuracy cannot be refined away
    if diff <= tol.max(noise * mass) {
        let mut err = [0.0; K];
        for k in 0..K {
            err[k] = (split[k] - whole[k]).abs();
        }
        return (split, err, true);
    }
    if depth >= MAX_DEPTH {
        let mut err = [0.0; K];
        for k in 0..K {
            err[k] = (split[k] - whole[k]).abs();
        }
        return (split, err, false);
    }
    let (lv, le, lok) = adapt_panel(ring, a, m, left, 0.5 * tol, noise, depth + 1);
    let (rv, re, rok) = adapt_panel(ring, m, b, right, 0.5 * tol, noise, depth + 1);
    let mut v = [0.0; K];
    let mut e = [0.0; K];
    for k in 0..K {
        v[k] = lv[k] + rv[k];
        e[k] = le[k] + re[k];
    }
    (v, e, lok && rok)
}

/// Result of a supremum search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Supremum {
    pub sup: f64,
    pub log_sup: f64,
    pub argmax: Complex,
    /// False when the supremum is approached at infinity.
    pub attained_inside: bool,
}

/// How a supremum search treats the far field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FarField {
    /// Rely on the integrand's envelope if it decays; otherwise probe radially.
    Auto,
    /// The caller knows the limit of `F` at infinity.
    Limit(f64),
}

/// `sup_{z∈ℂ} F(z)`.
///
/// With a decaying envelope the grid covers exactly the disc outside which
/// the envelope is below the running maximum. Otherwise a radial profile of
/// circle maxima is taken out to `|z| ~ 10⁶` (cheap in the log domain) and
/// sustained growth is reported as [`FockError::Unbounded`].
pub fn sup_plane(f: &EnvelopedIntegrand<'_>, spec: &QuadSpec, far: FarField) -> Result<Supremum> {
    spec.validate()?;
    if let Some(env) = f.envelope() {
        if env.log_c == f64::NEG_INFINITY {
            return Ok(Supremum { sup: 0.0, log_sup: f64::NEG_INFINITY, argmax: Complex::default(), attained_inside: true });
        }
        if env.beta > 0.0 && matches!(far, FarField::Auto) && f.check_envelope().is_ok() {
            return sup_with_envelope(f, env, spec);
        }
    }
    sup_by_profile(f, spec, far)
}

fn grid_spacing(beta: f64) -> f64 {
    (0.5 / beta.max(1e-12).sqrt()).min(0.25)
}

fn sup_with_envelope(f: &EnvelopedIntegrand<'_>, env: &Envelope, spec: &QuadSpec) -> Result<Supremum> {
    let h = grid_spacing(env.beta);
    let mut best = (f64::NEG_INFINITY, Complex::default());
    let mut candidates: Vec<(f64, Complex)> = Vec::new();
    let hard_cap = 10.0 * spec.max_radius.max(env.r0) + 100.0;
    let mut ring_idx = 0usize;
    loop {
        let r = ring_idx as f64 * h;
        let ring_best = circle_max(f, r, h);
        if ring_best.0 > best.0 {
            best = ring_best;
        }
        candidates.push(ring_best);
        if ring_best.0 > LOG_OVERFLOW {
            return Err(FockError::Unbounded { log_value: ring_best.0, radius: r });
        }
        if r >= env.r0 && env.log_bound(r) < best.0 && env.log_bound(r + h) < best.0 && (-2.0 * env.beta * r + env.gamma) < 0.0 {
            break;
        }
        if r > hard_cap {
            break;
        }
        ring_idx += 1;
    }
    if best.0 == f64::NEG_INFINITY {
        return Ok(Supremum { sup: 0.0, log_sup: f64::NEG_INFINITY, argmax: Complex::default(), attained_inside: true });
    }
    let refined = refine_candidates(f, candidates, h);
    Ok(Supremum { sup: refined.0.exp(), log_sup: refined.0, argmax: refined.1, attained_inside: true })
}

/// Max of `ln F` on the circle of radius r at spacing ~h, with golden-section
/// polish of the best angle.
fn circle_max(f: &EnvelopedIntegrand<'_>, r: f64, h: f64) -> (f64, Complex) {
    if r == 0.0 {
        let z = Complex::default();
        return (f.log_eval(z), z);
    }
    let n = ((2.0 * PI * r / h).ceil() as usize).clamp(16, 1 << 14);
    let step = 2.0 * PI / n as f64;
    let mut best = (f64::NEG_INFINITY, 0.0);
    for j in 0..n {
        let t = j as f64 * step;
        let v = f.log_eval(Complex::from_polar(r, t));
        if v > best.0 {
            best = (v, t);
        }
    }
    if best.0 == f64::NEG_INFINITY {
        return (best.0, Complex::from_polar(r, 0.0));
    }
    let g = |t: f64| f.log_eval(Complex::from_polar(r, t));
    let (t, v) = golden_max(&g, best.1 - step, best.1 + step, 1e-10);
    if v > best.0 {
        (v, Complex::from_polar(r, t))
    } else {
        (best.0, Complex::from_polar(r, best.1))
    }
}

fn golden_max(g: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    for _ in 0..200 {
        if (b - a).abs() < tol {
            break;
        }
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + phi * (b - a);
            f2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - phi * (b - a);
            f1 = g(x1);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Coordinate-wise golden-section ascent from the best few grid points.
fn refine_candidates(f: &EnvelopedIntegrand<'_>, mut candidates: Vec<(f64, Complex)>, h: f64) -> (f64, Complex) {
    candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    candidates.truncate(4);
    let mut best = candidates[0];
    for (v0, z0) in candidates {
        let (v, z) = coordinate_ascent(f, z0, v0, h);
        if v > best.0 {
            best = (v, z);
        }
    }
    best
}

fn coordinate_ascent(f: &EnvelopedIntegrand<'_>, z0: Complex, v0: f64, h: f64) -> (f64, Complex) {
    let mut z = z0;
    let mut v = v0;
    let mut width = 1.5 * h;
    for _ in 0..60 {
        let gx = |x: f64| f.log_eval(Complex::new(x, z.im));
        let (x, vx) = golden_max(&gx, z.re - width, z.re + width, 1e-12 * (1.0 + z.re.abs()));
        if vx >= v {
            z.re = x;
            v = vx;
        }
        let gy = |y: f64| f.log_eval(Complex::new(z.re, y));
        let (y, vy) = golden_max(&gy, z.im - width, z.im + width, 1e-12 * (1.0 + z.im.abs()));
        let improved = vy - v;
        if vy >= v {
            z.im = y;
            v = vy;
        }
        width = (width * 0.7).max(1e-6);
        if improved.abs() < 1e-15 * (1.0 + v.abs()) && width < 1e-3 {
            break;
        }
    }
    (v, z)
}

/// Radii of the far-field profile.
fn profile_radii(max_radius: f64) -> Vec<f64> {
    let mut radii: Vec<f64> = (0..=(4.0 * max_radius) as usize).map(|i| 0.25 * i as f64).collect();
    let mut r = max_radius;
    while r < 1e6 {
        r *= 2.0;
        radii.push(r);
    }
    radii
}

fn sup_by_profile(f: &EnvelopedIntegrand<'_>, spec: &QuadSpec, far: FarField) -> Result<Supremum> {
    let radii = profile_radii(spec.max_radius);
    let profile: Vec<(f64, Complex)> = radii
        .par_iter()
        .map(|&r| circle_max(f, r, 0.25_f64.max(r * 2e-3)))
        .collect();
    for (&r, &(v, _)) in radii.iter().zip(&profile) {
        if v > LOG_OVERFLOW {
            return Err(FockError::Unbounded { log_value: v, radius: r });
        }
    }
    // sustained growth over the last doublings
    let n = profile.len();
    let tail: Vec<f64> = profile[n - 4..].iter().map(|p| p.0).collect();
    let slopes: Vec<f64> = tail.windows(2).map(|w| (w[1] - w[0]) / 2f64.ln()).collect();
    if slopes.iter().all(|&s| s > 1e-3) {
        let (v, _) = profile[n - 1];
        return Err(FockError::Unbounded { log_value: v, radius: radii[n - 1] });
    }
    let inner: Vec<(f64, Complex)> = profile.clone();
    let (inner_best_v, _) = inner
        .iter()
        .copied()
        .fold((f64::NEG_INFINITY, Complex::default()), |a, b| if b.0 > a.0 { b } else { a });
    if inner_best_v == f64::NEG_INFINITY {
        return Ok(Supremum { sup: 0.0, log_sup: f64::NEG_INFINITY, argmax: Complex::default(), attained_inside: true });
    }
    let far_log = match far {
        FarField::Limit(l) if l > 0.0 => l.ln(),
        FarField::Limit(_) => f64::NEG_INFINITY,
        FarField::Auto => profile[n - 1].0,
    };
    // only refine candidates inside the linear grid
    let n_lin = radii.iter().take_while(|&&r| r <= spec.max_radius).count();
    let refined = refine_candidates(f, profile[..n_lin].to_vec(), 0.25);
    let rising_tail = tail.windows(2).all(|w| w[1] >= w[0] - 1e-14);
    if far_log >= refined.0 - 1e-12 || (rising_tail && profile[n - 1].0 >= refined.0 - 1e-9) {
        let v = far_log.max(profile[n - 1].0);
        return Ok(Supremum { sup: v.exp(), log_sup: v, argmax: profile[n - 1].1, attained_inside: false });
    }
    Ok(Supremum { sup: refined.0.exp(), log_sup: refined.0, argmax: refined.1, attained_inside: true })
}

/// Outcome of [`divergence_probe`].
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ProbeOutcome {
    Convergent { value: f64, error_bound: f64 },
    Divergent { growth_exponent: f64, logarithmic: bool },
    Indeterminate { log_partials: Vec<f64> },
}

impl ProbeOutcome {
    pub fn is_divergent(&self) -> bool {
        matches!(self, ProbeOutcome::Divergent { .. })
    }
}

/// Classifies `∫_ℂ F dm` from partial integrals over discs of the given radii.
///
/// Increments between successive radii are normalized per unit of `ln R`;
/// their local power-law exponent is ≈ 0 for logarithmic divergence, equal
/// to the growth power for `I(R) ~ R^k`, and negative for convergent tails.
pub fn divergence_probe(f: &EnvelopedIntegrand<'_>, radii: &[f64], spec: &QuadSpec) -> Result<ProbeOutcome> {
    spec.validate()?;
    if radii.len() < 3 || radii.windows(2).any(|w| !(w[1] > w[0])) || radii[0] <= 0.0 {
        return Err(FockError::Parameter("radii must be positive, strictly increasing, at least 3".into()));
    }
    let tol = DiscTol { rel: spec.rel_tol.max(1e-10), abs: 0.0 };
    let sampler = |z: Complex| (f.log_eval(z), [1.0]);
    let log_partials: Vec<f64> = radii
        .iter()
        .map(|&r| integrate_disc(&sampler, r, spec.base_rings, tol).log_value(0))
        .collect();
    let tail_bound = f
        .envelope()
        .filter(|e| e.decays())
        .map(|e| e.log_tail(*radii.last().unwrap()).exp());
    Ok(classify_partials(radii, &log_partials, spec.rel_tol, tail_bound))
}

/// Growth classification shared by every partial-sum ladder in the crate.
pub fn classify_partials(radii: &[f64], log_partials: &[f64], rel_tol: f64, tail_bound: Option<f64>) -> ProbeOutcome {
    let n = log_partials.len();
    if log_partials.iter().all(|&l| l == f64::NEG_INFINITY) {
        return ProbeOutcome::Convergent { value: 0.0, error_bound: tail_bound.unwrap_or(0.0) };
    }
    if n < 2 || radii.len() != n || log_partials.iter().any(|l| l.is_nan()) {
        return ProbeOutcome::Indeterminate { log_partials: log_partials.to_vec() };
    }
    let last = log_partials[n - 1];
    let prev = log_partials[n - 2];
    let rel_inc = if last == f64::NEG_INFINITY { 0.0 } else { -(prev - last).exp_m1() };
    let tail_ok = tail_bound.is_none_or(|t| t <= rel_tol * last.exp() + 1e-300);
    if rel_inc.abs() < rel_tol && tail_ok {
        return ProbeOutcome::Convergent {
            value: last.exp(),
            error_bound: rel_inc.abs() * last.exp() + tail_bound.unwrap_or(0.0),
        };
    }
    // ln of increments per unit ln R
    let log_inc: Vec<f64> = (1..n)
        .map(|k| {
            let (a, b) = (log_partials[k - 1], log_partials[k]);
            let lr = (radii[k] / radii[k - 1]).ln();
            if b <= a {
                f64::NEG_INFINITY
            } else if a == f64::NEG_INFINITY {
                b - lr.ln()
            } else {
                b + (-(a - b).exp_m1()).ln() - lr.ln()
            }
        })
        .collect();
    let mids: Vec<f64> = (1..n).map(|k| 0.5 * (radii[k].ln() + radii[k - 1].ln())).collect();
    let exps: Vec<f64> = (1..log_inc.len())
        .map(|k| {
            if log_inc[k] == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else if log_inc[k - 1] == f64::NEG_INFINITY {
                f64::INFINITY
            } else {
                (log_inc[k] - log_inc[k - 1]) / (mids[k] - mids[k - 1])
            }
        })
        .collect();
    if exps.is_empty() {
        return ProbeOutcome::Indeterminate { log_partials: log_partials.to_vec() };
    }
    let used = &exps[exps.len().saturating_sub(2)..];
    if used.iter().all(|&e| e <= DIVERGENCE_SLOPE) {
        let e = *used.last().unwrap();
        let value = last.exp();
        let last_inc = value - prev.exp();
        let ratio = (radii[n - 1] / radii[n - 2]).powf(e.max(-60.0));
        let extrapolated = if e == f64::NEG_INFINITY || last_inc <= 0.0 { 0.0 } else { last_inc * ratio / (1.0 - ratio) };
        return ProbeOutcome::Convergent {
            value: value + extrapolated,
            error_bound: extrapolated.abs() + tail_bound.unwrap_or(0.0) + rel_tol * value,
        };
    }
    if used.iter().all(|&e| e > DIVERGENCE_SLOPE) {
        let e = *used.last().unwrap();
        return ProbeOutcome::Divergent { growth_exponent: e.max(0.0), logarithmic: e < LOGARITHMIC_SLOPE };
    }
    ProbeOutcome::Indeterminate { log_partials: log_partials.to_vec() }
}

/// `∫_a^b f(w) dw` along the straight segment, composite Gauss–Legendre with
/// doubling panel counts.
pub fn integrate_segment(f: impl Fn(Complex) -> Complex, a: Complex, b: Complex, tol: f64) -> Result<Complex> {
    let d = b - a;
    if d.norm() == 0.0 {
        return Ok(Complex::default());
    }
    let rule = gl8();
    let estimate = |panels: usize| {
        let h = 1.0 / panels as f64;
        let mut re = KahanSum::default();
        let mut im = KahanSum::default();
        for i in 0..panels {
            let mid = (i as f64 + 0.5) * h;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                let t = mid + 0.5 * h * x;
                let v = f(a + d * t) * (0.5 * h * w);
                re.add(v.re);
                im.add(v.im);
            }
        }
        Complex::new(re.value(), im.value()) * d
    };
    let mut panels = 1;
    let mut prev = estimate(panels);
    while panels < (1 << 14) {
        panels *= 2;
        let cur = estimate(panels);
        if (cur - prev).norm() <= tol * cur.norm().max(1.0) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(FockError::Accuracy { estimate: prev.norm(), error_bound: f64::NAN })
}

#[cfg(test)]
mod tests;
