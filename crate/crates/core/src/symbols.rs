//! Exact symbol algebra: polynomials and `p(z)·e^{q(z)}` products.
//!
//! Every symbol, kernel and operator weight the crate handles is a single
//! [`ExpPoly`]. The class is closed under multiplication, differentiation and
//! right-composition with a polynomial, so integrands are always built
//! exactly and only evaluated numerically at the last step. Moduli are
//! evaluated in the log domain so that `e^{α|z|²/2}`-sized factors never
//! overflow.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FockError, Result};

pub type Complex = Complex64;

/// Relative threshold below which a leading coefficient is trimmed.
const TRIM_REL: f64 = 1e-14;

pub fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

/// Polynomial with complex coefficients in ascending degree.
///
/// Canonical: the highest stored coefficient is nonzero, the zero polynomial
/// has no coefficients.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly {
    coeffs: Vec<Complex>,
}

impl Poly {
    pub fn new(coeffs: Vec<Complex>) -> Self {
        let mut p = Poly { coeffs };
        p.canonicalize();
        p
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Self::new(coeffs.iter().map(|&x| c(x, 0.0)).collect())
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(a: Complex) -> Self {
        Self::new(vec![a])
    }

    /// The identity `z`.
    pub fn identity() -> Self {
        Self::new(vec![c(0.0, 0.0), c(1.0, 0.0)])
    }

    /// `a·z + b`.
    pub fn linear(a: Complex, b: Complex) -> Self {
        Self::new(vec![b, a])
    }

    pub fn monomial(k: usize, a: Complex) -> Self {
        let mut coeffs = vec![Complex::default(); k + 1];
        coeffs[k] = a;
        Self::new(coeffs)
    }

    fn canonicalize(&mut self) {
        let max = self.coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max);
        while let Some(last) = self.coeffs.last() {
            let m = last.norm();
            if m == 0.0 || m < TRIM_REL * max {
                self.coeffs.pop();
            } else {
                break;
            }
        }
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Complex {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Degree, or `None` for the zero polynomial (degree −∞).
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True when the polynomial is a constant (including zero).
    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    pub fn leading(&self) -> Complex {
        self.coeffs.last().copied().unwrap_or_default()
    }

    /// Sum of coefficient moduli.
    pub fn norm1(&self) -> f64 {
        self.coeffs.iter().map(|a| a.norm()).sum()
    }

    pub fn eval(&self, z: Complex) -> Complex {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex::default(), |acc, &a| acc * z + a)
    }

    /// `ln|p(z)|`, with `-∞` at zeros. Large `|z|` is handled by factoring
    /// out `z^deg` so the Horner sum stays bounded.
    pub fn log_abs(&self, z: Complex) -> f64 {
        let Some(deg) = self.degree() else {
            return f64::NEG_INFINITY;
        };
        let r = z.norm();
        if r <= 1.0 {
            return self.eval(z).norm().ln();
        }
        let inv = z.inv();
        let tail = self
            .coeffs
            .iter()
            .fold(Complex::default(), |acc, &a| acc * inv + a);
        deg as f64 * r.ln() + tail.norm().ln()
    }

    pub fn scale(&self, a: Complex) -> Self {
        Self::new(self.coeffs.iter().map(|&x| x * a).collect())
    }

    pub fn add(&self, other: &Poly) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new((0..n).map(|k| self.coeff(k) + other.coeff(k)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Self {
        self.add(&other.scale(c(-1.0, 0.0)))
    }

    pub fn mul(&self, other: &Poly) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![Complex::default(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &a)| a * k as f64)
                .collect(),
        )
    }

    /// `self(r(z))`.
    pub fn compose(&self, r: &Poly) -> Self {
        self.coeffs
            .iter()
            .rev()
            .fold(Poly::zero(), |acc, &a| acc.mul(r).add(&Poly::constant(a)))
    }

    /// All complex roots (with multiplicity) by Aberth iteration.
    pub fn roots(&self) -> Vec<Complex> {
        let Some(deg) = self.degree() else {
            return Vec::new();
        };
        if deg == 0 {
            return Vec::new();
        }
        let lead = self.leading();
        let monic: Vec<Complex> = self.coeffs.iter().map(|&a| a / lead).collect();
        if deg == 1 {
            return vec![-monic[0]];
        }
        let monic = Poly { coeffs: monic };
        let dmonic = monic.derivative();
        // Cauchy bound for the initial circle.
        let bound = 1.0
            + monic.coeffs[..deg]
                .iter()
                .map(|a| a.norm())
                .fold(0.0, f64::max);
        let mut zs: Vec<Complex> = (0..deg)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / deg as f64;
                Complex::from_polar(0.5 * bound, theta)
            })
            .collect();
        for _ in 0..500 {
            let mut max_step: f64 = 0.0;
            for i in 0..deg {
                let zi = zs[i];
                let pv = monic.eval(zi);
                if pv.norm() == 0.0 {
                    continue;
                }
                let ratio = pv / dmonic.eval(zi);
                let sum: Complex = (0..deg)
                    .filter(|&j| j != i)
                    .map(|j| (zi - zs[j]).inv())
                    .sum();
                let step = ratio / (Complex::new(1.0, 0.0) - ratio * sum);
                if step.is_finite() {
                    zs[i] = zi - step;
                    max_step = max_step.max(step.norm() / (1.0 + zi.norm()));
                }
            }
            if max_step < 1e-15 {
                break;
            }
        }
        zs
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() != 0.0)
            .map(|(k, a)| match k {
                0 => format!("({a})"),
                1 => format!("({a})z"),
                _ => format!("({a})z^{k}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}

/// `z ↦ p(z)·e^{q(z)}`.
///
/// Canonical zero: a zero `p` forces a zero `q`.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ExpPoly {
    p: Poly,
    q: Poly,
}

impl ExpPoly {
    pub fn new(p: Poly, q: Poly) -> Self {
        if p.is_zero() {
            ExpPoly::zero()
        } else {
            ExpPoly { p, q }
        }
    }

    pub fn zero() -> Self {
        ExpPoly {
            p: Poly::zero(),
            q: Poly::zero(),
        }
    }

    pub fn one() -> Self {
        Self::constant(c(1.0, 0.0))
    }

    pub fn constant(a: Complex) -> Self {
        Self::new(Poly::constant(a), Poly::zero())
    }

    pub fn poly(p: Poly) -> Self {
        Self::new(p, Poly::zero())
    }

    /// `e^{q(z)}`.
    pub fn exp(q: Poly) -> Self {
        Self::new(Poly::constant(c(1.0, 0.0)), q)
    }

    pub fn p(&self) -> &Poly {
        &self.p
    }

    pub fn q(&self) -> &Poly {
        &self.q
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero()
    }

    /// True when the exponent is constant, i.e. the symbol is a polynomial
    /// up to a constant factor.
    pub fn is_polynomial(&self) -> bool {
        self.q.is_constant()
    }

    /// The symbol as a plain polynomial, when it is one.
    pub fn as_poly(&self) -> Option<Poly> {
        if !self.is_polynomial() {
            return None;
        }
        let factor = self.q.coeff(0).exp();
        Some(self.p.scale(factor))
    }

    pub fn multiply(&self, other: &ExpPoly) -> ExpPoly {
        ExpPoly::new(self.p.mul(&other.p), self.q.add(&other.q))
    }

    pub fn scale(&self, a: Complex) -> ExpPoly {
        ExpPoly::new(self.p.scale(a), self.q.clone())
    }

    /// `(p′ + p·q′)e^{q}`.
    pub fn differentiate(&self) -> ExpPoly {
        let dp = self.p.derivative().add(&self.p.mul(&self.q.derivative()));
        ExpPoly::new(dp, self.q.clone())
    }

    /// `p(r(z))·e^{q(r(z))}`.
    pub fn compose(&self, r: &Poly) -> ExpPoly {
        ExpPoly::new(self.p.compose(r), self.q.compose(r))
    }

    /// Direct evaluation. Overflows to infinity when `|f(z)|` exceeds the
    /// `f64` range; use [`ExpPoly::log_modulus`] when that can happen.
    pub fn eval(&self, z: Complex) -> Complex {
        if self.is_zero() {
            return Complex::default();
        }
        self.p.eval(z) * self.q.eval(z).exp()
    }

    /// `ln|p(z)| + Re q(z)`, `-∞` at zeros of `p`.
    pub fn log_modulus(&self, z: Complex) -> f64 {
        let lp = self.p.log_abs(z);
        if lp == f64::NEG_INFINITY {
            return lp;
        }
        lp + self.q.eval(z).re
    }

    /// `(ln|f(z)|, arg f(z))`.
    pub fn eval_polar(&self, z: Complex) -> (f64, f64) {
        let pz = self.p.eval(z);
        let qz = self.q.eval(z);
        (self.log_modulus(z), pz.arg() + qz.im)
    }
}

impl From<Poly> for ExpPoly {
    fn from(p: Poly) -> Self {
        ExpPoly::poly(p)
    }
}

impl fmt::Display for ExpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.q.is_zero() {
            write!(f, "{}", self.p)
        } else {
            write!(f, "[{}]·exp[{}]", self.p, self.q)
        }
    }
}

/// Reproducing kernel `K_{(w,α)}(z) = e^{α z w̄}` or its normalization
/// `k_{(w,α)}(z) = e^{α z w̄ − α|w|²/2}`.
///
/// The normalizing factor is kept in the constant term of the exponent so it
/// never underflows.
pub fn kernel(w: Complex, alpha: f64, normalized: bool) -> Result<ExpPoly> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(FockError::Parameter(format!("alpha must be > 0, got {alpha}")));
    }
    let shift = if normalized { -0.5 * alpha * w.norm_sqr() } else { 0.0 };
    let q = Poly::new(vec![c(shift, 0.0), w.conj() * alpha]);
    Ok(ExpPoly::exp(q))
}

/// Fock-space exponent: finite `p > 0` or `∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Exponent {
    Finite(f64),
    Infinite,
}

impl Exponent {
    pub fn finite(self) -> Option<f64> {
        match self {
            Exponent::Finite(p) => Some(p),
            Exponent::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Exponent::Infinite)
    }
}

impl std::str::FromStr for Exponent {
    type Err = FockError;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if matches!(t.as_str(), "inf" | "infinity" | "∞") {
            return Ok(Exponent::Infinite);
        }
        let p: f64 = t
            .parse()
            .map_err(|_| FockError::Parameter(format!("cannot parse exponent {s:?}")))?;
        if p.is_infinite() && p > 0.0 {
            return Ok(Exponent::Infinite);
        }
        if !(p > 0.0) {
            return Err(FockError::Parameter(format!("exponent must be > 0, got {s}")));
        }
        Ok(Exponent::Finite(p))
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Finite(p) => write!(f, "{p}"),
            Exponent::Infinite => write!(f, "inf"),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Exponent::Finite(p) => s.serialize_f64(*p),
            Exponent::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Weighted Fock space `F_α^p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FockParams {
    pub alpha: f64,
    pub p: Exponent,
}

impl FockParams {
    pub fn new(alpha: f64, p: Exponent) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(FockError::Parameter(format!("alpha must be > 0, got {alpha}")));
        }
        if let Exponent::Finite(p) = p {
            if !(p > 0.0 && p.is_finite()) {
                return Err(FockError::Parameter(format!("p must be > 0, got {p}")));
            }
        }
        Ok(FockParams { alpha, p })
    }

    pub fn finite(alpha: f64, p: f64) -> Result<Self> {
        Self::new(alpha, Exponent::Finite(p))
    }

    pub fn infinite(alpha: f64) -> Result<Self> {
        Self::new(alpha, Exponent::Infinite)
    }
}

/// JSON wire form of a symbol: `{"p": [[re,im],...], "q": [[re,im],...]}`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct SymbolJson {
    pub p: Vec<[f64; 2]>,
    #[serde(default)]
    pub q: Vec<[f64; 2]>,
}

fn coeffs_from_json(raw: &[[f64; 2]]) -> Result<Vec<Complex>> {
    raw.iter()
        .map(|&[re, im]| {
            if re.is_finite() && im.is_finite() {
                Ok(c(re, im))
            } else {
                Err(FockError::Input("non-finite coefficient".into()))
            }
        })
        .collect()
}

fn coeffs_to_json(p: &Poly) -> Vec<[f64; 2]> {
    p.coeffs().iter().map(|a| [a.re, a.im]).collect()
}

impl TryFrom<&SymbolJson> for ExpPoly {
    type Error = FockError;

    fn try_from(j: &SymbolJson) -> Result<Self> {
        Ok(ExpPoly::new(
            Poly::new(coeffs_from_json(&j.p)?),
            Poly::new(coeffs_from_json(&j.q)?),
        ))
    }
}

impl From<&ExpPoly> for SymbolJson {
    fn from(f: &ExpPoly) -> Self {
        SymbolJson {
            p: coeffs_to_json(&f.p),
            q: coeffs_to_json(&f.q),
        }
    }
}

impl Serialize for ExpPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SymbolJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for ExpPoly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = SymbolJson::deserialize(d)?;
        ExpPoly::try_from(&j).map_err(serde::de::Error::custom)
    }
}

impl Serialize for Poly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        SymbolJson { p: coeffs_to_json(self), q: Vec::new() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Poly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = SymbolJson::deserialize(d)?;
        let f = ExpPoly::try_from(&j).map_err(serde::de::Error::custom)?;
        f.as_poly()
            .ok_or_else(|| serde::de::Error::custom("expected a polynomial symbol (empty \"q\")"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Complex, b: Complex, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn canonical_trim_and_degree() {
        let p = Poly::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(1e-16, 0.0)]);
        assert_eq!(p.degree(), Some(1));
        assert_eq!(Poly::new(vec![c(0.0, 0.0); 3]).degree(), None);
        assert!(Poly::zero().is_zero());
    }

    #[test]
    fn multiply_examples() {
        let z = ExpPoly::poly(Poly::identity());
        let ez = ExpPoly::exp(Poly::identity());
        let prod = z.multiply(&ez);
        assert_eq!(prod, ExpPoly::new(Poly::identity(), Poly::identity()));

        let zero = ExpPoly::zero().multiply(&ExpPoly::exp(Poly::monomial(2, c(1.0, 0.0))));
        assert!(zero.is_zero());
        assert!(zero.q().is_zero());

        let e2 = ExpPoly::exp(Poly::monomial(1, c(2.0, 0.0)));
        let e3 = ExpPoly::exp(Poly::monomial(1, c(3.0, 0.0)));
        let e5 = e2.multiply(&e3);
        assert_eq!(e5, ExpPoly::exp(Poly::monomial(1, c(5.0, 0.0))));
        let one = c(1.0, 0.0);
        assert!(close(e5.eval(one), e2.eval(one) * e3.eval(one), 1e-14));
    }

    #[test]
    fn differentiate_examples() {
        let z2 = ExpPoly::poly(Poly::monomial(2, c(1.0, 0.0)));
        assert_eq!(z2.differentiate(), ExpPoly::poly(Poly::monomial(1, c(2.0, 0.0))));

        let ez2 = ExpPoly::exp(Poly::monomial(2, c(1.0, 0.0)));
        assert_eq!(
            ez2.differentiate(),
            ExpPoly::new(Poly::monomial(1, c(2.0, 0.0)), Poly::monomial(2, c(1.0, 0.0)))
        );

        let f = ExpPoly::new(Poly::from_real(&[1.0, 1.0]), Poly::from_real(&[0.0, 3.0]));
        assert_eq!(
            f.differentiate(),
            ExpPoly::new(Poly::from_real(&[4.0, 3.0]), Poly::from_real(&[0.0, 3.0]))
        );
    }

    #[test]
    fn compose_examples() {
        let ez = ExpPoly::exp(Poly::identity());
        let r = Poly::from_real(&[1.0, 2.0]);
        assert_eq!(ez.compose(&r), ExpPoly::exp(Poly::from_real(&[1.0, 2.0])));

        let z2 = ExpPoly::poly(Poly::monomial(2, c(1.0, 0.0)));
        let shifted = z2.compose(&Poly::from_real(&[1.0, 1.0]));
        assert_eq!(shifted, ExpPoly::poly(Poly::from_real(&[1.0, 2.0, 1.0])));

        let k = kernel(c(1.0, 1.0), 1.0, false).unwrap();
        let kc = k.compose(&Poly::monomial(2, c(1.0, 0.0)));
        assert_eq!(kc, ExpPoly::exp(Poly::monomial(2, c(1.0, -1.0))));
    }

    #[test]
    fn log_modulus_examples() {
        let ez = ExpPoly::exp(Poly::identity());
        assert!((ez.log_modulus(c(10.0, 0.0)) - 10.0).abs() < 1e-14);
        let z = ExpPoly::poly(Poly::identity());
        assert_eq!(z.log_modulus(c(0.0, 0.0)), f64::NEG_INFINITY);
        let k = kernel(c(3.0, 0.0), 1.0, true).unwrap();
        assert!((k.log_modulus(c(3.0, 0.0)) - 4.5).abs() < 1e-13);
        // cross-check against direct evaluation
        assert!((k.eval(c(3.0, 0.0)).norm().ln() - 4.5).abs() < 1e-12);
    }

    #[test]
    fn log_modulus_large_arguments_do_not_overflow() {
        let p = Poly::new((0..12).map(|k| c(1e3, -(k as f64))).collect());
        let f = ExpPoly::new(p, Poly::from_real(&[0.0, 0.0, 1e3]));
        let v = f.log_modulus(c(1e3, -7e2));
        assert!(v.is_finite());
    }

    #[test]
    fn kernel_examples() {
        let k0 = kernel(c(0.0, 0.0), 1.0, true).unwrap();
        assert!(close(k0.eval(c(2.5, -1.0)), c(1.0, 0.0), 1e-15));
        let k = kernel(c(1.0, 0.0), 2.0, false).unwrap();
        assert!(close(k.eval(c(1.0, 0.0)), c(2f64.exp(), 0.0), 1e-14));
        let w = c(0.0, 2.0);
        let kn = kernel(w, 1.0, true).unwrap();
        assert!((kn.eval(w).norm() - 2f64.exp()).abs() < 1e-12);
        assert!(kernel(w, 0.0, true).is_err());
        assert!(kernel(w, -1.0, false).is_err());
    }

    #[test]
    fn roots_recover_factors() {
        let p = Poly::new(vec![c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])
            .mul(&Poly::linear(c(1.0, 0.0), c(0.0, -2.0)));
        let mut roots = p.roots();
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        for r in &roots {
            assert!(p.eval(*r).norm() < 1e-12, "{r}");
        }
        assert_eq!(roots.len(), 3);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let f = ExpPoly::new(Poly::from_real(&[1.0, 2.0]), Poly::new(vec![c(0.0, 0.0), c(0.5, -1.0)]));
        let s = serde_json::to_string(&f).unwrap();
        let back: ExpPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        let poly: Poly = serde_json::from_str(r#"{"p": [[1,0],[0,1]], "q": []}"#).unwrap();
        assert_eq!(poly, Poly::new(vec![c(1.0, 0.0), c(0.0, 1.0)]));
        assert!(serde_json::from_str::<Poly>(r#"{"p": [[1,0]], "q": [[0,0],[1,0]]}"#).is_err());
    }

    #[test]
    fn exponent_parsing() {
        assert_eq!("inf".parse::<Exponent>().unwrap(), Exponent::Infinite);
        assert_eq!("2.5".parse::<Exponent>().unwrap(), Exponent::Finite(2.5));
        assert!("0".parse::<Exponent>().is_err());
        assert!("-1".parse::<Exponent>().is_err());
        assert!(FockParams::finite(0.0, 2.0).is_err());
    }
}
