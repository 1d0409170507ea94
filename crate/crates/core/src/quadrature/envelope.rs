//! Log-domain integrand shapes and their Gaussian tail envelopes.

use std::f64::consts::PI;

use serde::Serialize;

use crate::symbols::{Complex, ExpPoly, Poly};

/// Certified bound `ln F(z) ≤ log_c − beta·|z|² + gamma·|z|` for `|z| ≥ r0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Envelope {
    pub log_c: f64,
    pub beta: f64,
    pub gamma: f64,
    pub r0: f64,
}

impl Envelope {
    /// Envelope of the zero function.
    pub fn zero() -> Self {
        Envelope {
            log_c: f64::NEG_INFINITY,
            beta: 1.0,
            gamma: 0.0,
            r0: 0.0,
        }
    }

    pub fn log_bound(&self, rho: f64) -> f64 {
        self.log_c - self.beta * rho * rho + self.gamma * rho
    }

    pub fn decays(&self) -> bool {
        self.beta > 0.0 || self.log_c == f64::NEG_INFINITY
    }

    /// `ln ∫_{|z|>R} C e^{−β|z|²+γ|z|} dm(z)` in closed form (requires `beta > 0`).
    pub fn log_tail(&self, radius: f64) -> f64 {
        if self.log_c == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        if self.beta <= 0.0 {
            return f64::INFINITY;
        }
        let b = self.beta;
        let m = self.gamma / (2.0 * b);
        let x0 = radius - m;
        let sb = b.sqrt();
        // ∫_R^∞ ρ e^{−β(ρ−m)²} dρ
        let gauss_part = (-b * x0 * x0).exp() / (2.0 * b);
        let erfc_part = m * PI.sqrt() / (2.0 * sb) * libm::erfc(sb * x0);
        let radial = gauss_part + erfc_part;
        if radial <= 0.0 || !radial.is_finite() {
            // both pieces underflowed or cancelled to nothing
            return if x0 > 0.0 {
                (2.0 * PI).ln() + self.log_c + b * m * m - b * x0 * x0 + (x0.max(1.0) / b).ln()
            } else {
                f64::INFINITY
            };
        }
        (2.0 * PI).ln() + self.log_c + b * m * m + radial.ln()
    }

    /// Smallest radius `R ≥ r0` whose tail is at most `e^{log_target}`.
    pub fn radius_for_tail(&self, log_target: f64) -> f64 {
        if self.log_c == f64::NEG_INFINITY {
            return self.r0;
        }
        let mut lo = self.r0;
        if self.log_tail(lo) <= log_target {
            return lo;
        }
        let mut hi = lo.max(1.0);
        while self.log_tail(hi) > log_target {
            hi *= 2.0;
            if hi > 1e8 {
                return hi;
            }
        }
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if self.log_tail(mid) > log_target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

/// A nonnegative integrand described by its logarithm:
///
/// `ln F(z) = log_const + Σ s·ln|f(z)| + t|z|² + Σ c·|r(z)|² − Σ e·ln(1+|r(z)|)`.
///
/// Every criterion integrand and density in the crate has this shape, which
/// is what makes the envelope computable from coefficients.
#[derive(Clone, Debug, Default)]
pub struct LogShape {
    pub log_const: f64,
    pub factors: Vec<(f64, ExpPoly)>,
    pub gauss: f64,
    pub mod_sq: Vec<(f64, Poly)>,
    pub damping: Vec<(f64, Poly)>,
}

impl LogShape {
    pub fn new() -> Self {
        LogShape::default()
    }

    pub fn constant(log_const: f64) -> Self {
        LogShape {
            log_const,
            ..Default::default()
        }
    }

    pub fn with_const(mut self, log_const: f64) -> Self {
        self.log_const += log_const;
        self
    }

    /// Multiply by `|f|^s`.
    pub fn factor(mut self, s: f64, f: ExpPoly) -> Self {
        if s != 0.0 {
            self.factors.push((s, f));
        }
        self
    }

    /// Multiply by `e^{t|z|²}`.
    pub fn gauss(mut self, t: f64) -> Self {
        self.gauss += t;
        self
    }

    /// Multiply by `e^{c|r(z)|²}`.
    pub fn mod_sq(mut self, c: f64, r: Poly) -> Self {
        if c != 0.0 {
            self.mod_sq.push((c, r));
        }
        self
    }

    /// Multiply by `(1+|r(z)|)^{−e}`.
    pub fn damping(mut self, e: f64, r: Poly) -> Self {
        if e != 0.0 {
            self.damping.push((e, r));
        }
        self
    }

    /// Product of two shapes.
    pub fn times(mut self, other: &LogShape) -> Self {
        self.log_const += other.log_const;
        self.factors.extend(other.factors.iter().cloned());
        self.gauss += other.gauss;
        self.mod_sq.extend(other.mod_sq.iter().cloned());
        self.damping.extend(other.damping.iter().cloned());
        self
    }

    pub fn is_identically_zero(&self) -> bool {
        self.log_const == f64::NEG_INFINITY
            || self.factors.iter().any(|(s, f)| *s > 0.0 && f.is_zero())
    }

    pub fn eval(&self, z: Complex) -> f64 {
        if self.log_const == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        // c|az+b|² = c|a|²|z|² + 2c·Re(az·b̄) + c|b|², with the |z|² coefficients summed first
        let mut t = self.gauss;
        let mut quad = 0.0;
        for (c, r) in &self.mod_sq {
            if r.coeffs().len() <= 2 {
                let (a, b) = (r.coeff(1), r.coeff(0));
                t += c * a.norm_sqr();
                quad += c * (2.0 * (a * z * b.conj()).re + b.norm_sqr());
            } else {
                quad += c * r.eval(z).norm_sqr();
            }
        }
        quad += t * z.norm_sqr();
        let mut acc = self.log_const;
        for (s, f) in &self.factors {
            let l = f.log_modulus(z);
            if l == f64::NEG_INFINITY {
                if *s > 0.0 {
                    return f64::NEG_INFINITY;
                }
                return f64::INFINITY;
            }
            acc += s * l;
        }
        for (e, r) in &self.damping {
            acc -= e * r.eval(z).norm().ln_1p();
        }
        acc + quad
    }

    /// Envelope derived from coefficient magnitudes, or `None` when the
    /// shape admits super-Gaussian growth (or a reciprocal polynomial) that
    /// no envelope of the form `C e^{−β|z|²+γ|z|}` can bound.
    pub fn envelope(&self) -> Option<Envelope> {
        if self.is_identically_zero() {
            return Some(Envelope::zero());
        }
        let mut quad = self.gauss; // coefficient of ρ²
        let mut lin = 0.0; // coefficient of ρ
        let mut logc = 0.0; // coefficient of ln ρ
        let mut konst = self.log_const;
        let mut r_min: f64 = 2.0;

        for (s, f) in &self.factors {
            let (p, q) = (f.p(), f.q());
            let s_abs = s.abs();
            match q.degree() {
                None => {}
                Some(d) if d >= 3 => return None,
                Some(d) => {
                    konst += s * q.coeff(0).re;
                    if d >= 1 {
                        lin += s_abs * q.coeff(1).norm();
                    }
                    if d == 2 {
                        quad += s_abs * q.coeff(2).norm();
                    }
                }
            }
            if *s > 0.0 {
                // |p(z)| ≤ ‖p‖₁ ρ^deg for ρ ≥ 1
                konst += s * p.norm1().ln();
                logc += s * p.degree().unwrap_or(0) as f64;
            } else if p.is_constant() {
                konst += s * p.coeff(0).norm().ln();
            } else {
                return None;
            }
        }

        for (cc, r) in &self.mod_sq {
            let Some(d) = r.degree() else { continue };
            let c_abs = cc.abs();
            if d == 0 {
                konst += cc * r.coeff(0).norm_sqr();
            } else if d == 1 {
                let (a1, a0) = (r.coeff(1).norm(), r.coeff(0).norm());
                // |r| between |a1|ρ − |a0| and |a1|ρ + |a0|
                quad += cc * a1 * a1;
                lin += 2.0 * c_abs * a1 * a0;
                if *cc > 0.0 {
                    konst += cc * a0 * a0;
                }
            } else if *cc > 0.0 {
                return None;
            } else {
                // |r(z)| ≥ |lead|ρ^d / 2 once ρ ≥ 2·Σ|lower|/|lead|, and ρ^d ≥ ρ
                let lead = r.leading().norm();
                let lower: f64 = r.coeffs()[..d].iter().map(|a| a.norm()).sum();
                r_min = r_min.max(2.0 * lower / lead);
                quad += cc * lead * lead / 4.0;
            }
        }

        for (e, r) in &self.damping {
            if *e >= 0.0 {
                continue;
            }
            let d = r.degree().unwrap_or(0) as f64;
            konst += e.abs() * r.norm1().ln_1p();
            logc += e.abs() * d;
        }

        let r0 = r_min;
        let (log_term_const, log_term_lin) = if logc > 0.0 {
            // tangent of the concave ln at r0
            (logc * (r0.ln() - 1.0), logc / r0)
        } else {
            (logc * r0.ln(), 0.0)
        };
        Some(Envelope {
            log_c: konst + log_term_const,
            beta: -quad,
            gamma: lin + log_term_lin,
            r0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::c;

    fn check_bound(shape: &LogShape) {
        let env = shape.envelope().expect("envelope");
        for i in 0..40 {
            let rho = env.r0 * (1.0 + 0.3 * i as f64);
            for j in 0..24 {
                let z = Complex::from_polar(rho, 0.261_799 * j as f64 + 0.1);
                assert!(
                    shape.eval(z) <= env.log_bound(rho) + 1e-9 * (1.0 + env.log_bound(rho).abs()),
                    "violated at {z}"
                );
            }
        }
    }

    #[test]
    fn gaussian_tail_closed_form() {
        let env = Envelope { log_c: 0.0, beta: 1.0, gamma: 0.0, r0: 0.0 };
        // ∫_{|z|>R} e^{−|z|²} = π e^{−R²}
        for r in [0.0, 1.0, 3.0] {
            assert!((env.log_tail(r) - (PI.ln() - r * r)).abs() < 1e-12);
        }
        let r = env.radius_for_tail(-30.0);
        assert!((env.log_tail(r) + 30.0).abs() < 1e-6);
    }

    #[test]
    fn shifted_tail_is_bounded_by_numeric_integral() {
        let env = Envelope { log_c: 0.5, beta: 0.5, gamma: 3.0, r0: 0.0 };
        let radius = 4.0;
        // 1D trapezoid of 2πρ·envelope on [R, 40]
        let n = 200_000;
        let h = (40.0 - radius) / n as f64;
        let mut s = 0.0;
        for i in 0..=n {
            let rho = radius + i as f64 * h;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            s += w * 2.0 * PI * rho * env.log_bound(rho).exp();
        }
        s *= h;
        assert!((env.log_tail(radius) - s.ln()).abs() < 1e-8);
    }

    #[test]
    fn envelopes_bound_their_shapes() {
        let g = ExpPoly::new(Poly::from_real(&[1.0, -2.0, 0.5]), Poly::new(vec![c(0.0, 0.0), c(0.3, 0.2)]));
        let s1 = LogShape::new().factor(2.0, g.clone()).gauss(-1.0).damping(2.0, Poly::identity());
        check_bound(&s1);
        let w = c(2.0, -1.0);
        let psi = Poly::linear(c(0.5, 0.1), c(1.0, 0.0));
        let s2 = LogShape::new()
            .factor(3.0, g.differentiate())
            .mod_sq(1.5, psi.clone())
            .mod_sq(-1.5, Poly::constant(w).sub(&psi))
            .gauss(-1.5)
            .damping(3.0, Poly::identity());
        check_bound(&s2);
        let s3 = LogShape::new()
            .mod_sq(-2.0, Poly::from_real(&[3.0, 1.0, 1.0]))
            .damping(-2.0, Poly::from_real(&[1.0, 2.0]));
        check_bound(&s3);
    }

    #[test]
    fn super_gaussian_growth_has_no_envelope() {
        let s = LogShape::new().mod_sq(0.5, Poly::monomial(2, c(1.0, 0.0))).gauss(-0.5);
        assert!(s.envelope().is_none());
        let s = LogShape::new().factor(1.0, ExpPoly::exp(Poly::monomial(3, c(1.0, 0.0))));
        assert!(s.envelope().is_none());
    }

    #[test]
    fn zero_shape() {
        let s = LogShape::new().factor(1.0, ExpPoly::zero());
        assert!(s.is_identically_zero());
        assert_eq!(s.envelope().unwrap().log_c, f64::NEG_INFINITY);
        assert_eq!(s.eval(c(1.0, 1.0)), f64::NEG_INFINITY);
    }
}
