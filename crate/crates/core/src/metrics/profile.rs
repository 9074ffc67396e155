//! One-variable profiles: potentials f(t) on (deformed) conifolds.

use crate::error::{GeomError, Result};
use crate::numkit::{fd_d1, quad_adaptive};

/// A scalar profile with derivatives up to third order.
pub trait RadialProfile: Send + Sync {
    fn value(&self, s: f64) -> Result<f64>;
    fn d1(&self, s: f64) -> Result<f64>;
    fn d2(&self, s: f64) -> Result<f64>;
    fn d3(&self, s: f64) -> Result<f64>;
    /// Open interval on which the profile is defined.
    fn domain(&self) -> (f64, f64);

    fn jet(&self, s: f64) -> Result<[f64; 4]> {
        Ok([self.value(s)?, self.d1(s)?, self.d2(s)?, self.d3(s)?])
    }

    fn check_domain(&self, s: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if s > lo && s < hi {
            Ok(())
        } else {
            Err(GeomError::Domain(format!("{s} outside profile domain ({lo}, {hi})")))
        }
    }
}

/// `f(t) = C·t^k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerProfile {
    pub coeff: f64,
    pub exponent: f64,
}

impl PowerProfile {
    pub fn new(coeff: f64, exponent: f64) -> Self {
        Self { coeff, exponent }
    }

    /// The potential √2·t^{1/2} of the Kepler metric.
    pub fn kepler() -> Self {
        Self::new(std::f64::consts::SQRT_2, 0.5)
    }

    /// `C t^{(n−1)/n}` with `C = 2n²/(n−1)²`.
    pub fn sasaki_einstein(n: usize) -> Self {
        let nf = n as f64;
        Self::new(2.0 * nf * nf / ((nf - 1.0) * (nf - 1.0)), (nf - 1.0) / nf)
    }
}

impl RadialProfile for PowerProfile {
    fn value(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        Ok(self.coeff * t.powf(self.exponent))
    }
    fn d1(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        let k = self.exponent;
        Ok(self.coeff * k * t.powf(k - 1.0))
    }
    fn d2(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        let k = self.exponent;
        Ok(self.coeff * k * (k - 1.0) * t.powf(k - 2.0))
    }
    fn d3(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        let k = self.exponent;
        Ok(self.coeff * k * (k - 1.0) * (k - 2.0) * t.powf(k - 3.0))
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}

/// Ricci-flat potential on the n-conifold:
/// `f′(t) = (1/t)·(nc/(n−1)·t^{n−1} + c₁)^{1/n}`, `f(1) = 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConifoldProfile {
    pub n: usize,
    pub c: f64,
    pub c1: f64,
}

impl ConifoldProfile {
    pub fn new(n: usize, c: f64, c1: f64) -> Result<Self> {
        if n < 2 || !(c > 0.0) || !(c1 >= 0.0) {
            return Err(GeomError::Config(format!(
                "conifold profile needs n ≥ 2, c > 0, c₁ ≥ 0 (got n={n}, c={c}, c₁={c1})"
            )));
        }
        Ok(Self { n, c, c1 })
    }

    /// `Y(t) = nc/(n−1)·t^{n−1} + c₁`, so that `(t f′)ⁿ = Y`.
    pub fn radicand(&self, t: f64) -> f64 {
        let nf = self.n as f64;
        nf * self.c / (nf - 1.0) * t.powi(self.n as i32 - 1) + self.c1
    }

    fn g_jet(&self, t: f64) -> Result<(f64, f64, f64)> {
        self.check_domain(t)?;
        let y = self.radicand(t);
        if !(y > 0.0) {
            return Err(GeomError::Domain(format!("radicand {y} ≤ 0 at t = {t}")));
        }
        let nf = self.n as f64;
        let inv = 1.0 / nf;
        let g = y.powf(inv);
        let tn2 = t.powi(self.n as i32 - 2);
        let g1 = self.c * tn2 * y.powf(inv - 1.0);
        let tn3 = if self.n >= 3 { (nf - 2.0) * t.powi(self.n as i32 - 3) } else { 0.0 };
        let g2 = self.c * (tn3 * y.powf(inv - 1.0) + tn2 * (inv - 1.0) * y.powf(inv - 2.0) * nf * self.c * tn2);
        Ok((g, g1, g2))
    }
}

impl RadialProfile for ConifoldProfile {
    fn value(&self, t: f64) -> Result<f64> {
        self.check_domain(t)?;
        if self.c1 == 0.0 {
            let nf = self.n as f64;
            let k = (nf - 1.0) / nf;
            let coeff = (nf * self.c / (nf - 1.0)).powf(1.0 / nf) / k;
            return Ok(coeff * (t.powf(k) - 1.0));
        }
        quad_adaptive(|s| self.d1(s).unwrap_or(f64::NAN), 1.0, t, 1e-13 * (1.0 + t))
    }
    fn d1(&self, t: f64) -> Result<f64> {
        let (g, _, _) = self.g_jet(t)?;
        Ok(g / t)
    }
    fn d2(&self, t: f64) -> Result<f64> {
        let (g, g1, _) = self.g_jet(t)?;
        Ok(g1 / t - g / (t * t))
    }
    fn d3(&self, t: f64) -> Result<f64> {
        let (g, g1, g2) = self.g_jet(t)?;
        Ok(g2 / t - 2.0 * g1 / (t * t) + 2.0 * g / (t * t * t))
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
}

/// Ricci-flat potential on the deformed conifold `Σw² = a`, `t ≥ |a|`.
///
/// With `t = |a|cosh w` and `h(w) = f(t)`:
/// `h′(w)ⁿ = nc|a|^{n−1} ∫₀^w sinh^{n−1}`, `f′(t) = h′(w)/(|a| sinh w)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeformedProfile {
    pub n: usize,
    pub abs_a: f64,
    pub c: f64,
}

impl DeformedProfile {
    pub fn new(n: usize, abs_a: f64, c: f64) -> Result<Self> {
        if n < 2 || !(abs_a > 0.0) || !(c > 0.0) {
            return Err(GeomError::Config(format!(
                "deformed profile needs n ≥ 2, |a| > 0, c > 0 (got n={n}, |a|={abs_a}, c={c})"
            )));
        }
        Ok(Self { n, abs_a, c })
    }

    /// `∫₀^w sinh^{n−1}(s) ds` by adaptive quadrature.
    pub fn sinh_integral(&self, w: f64) -> Result<f64> {
        let m = self.n as i32 - 1;
        let scale = w.sinh().abs().powi(m) * w.abs().max(1e-300);
        quad_adaptive(|s| s.sinh().powi(m), 0.0, w, 1e-15 * scale.max(1e-300))
    }

    /// `h′(w)`.
    pub fn h_prime(&self, w: f64) -> Result<f64> {
        let nf = self.n as f64;
        let rhs = nf * self.c * self.abs_a.powi(self.n as i32 - 1) * self.sinh_integral(w)?;
        Ok(rhs.max(0.0).powf(1.0 / nf))
    }

    fn angle(&self, t: f64) -> Result<f64> {
        if t < self.abs_a {
            return Err(GeomError::Domain(format!("t = {t} below |a| = {}", self.abs_a)));
        }
        Ok((t / self.abs_a).acosh())
    }
}

impl RadialProfile for DeformedProfile {
    fn value(&self, t: f64) -> Result<f64> {
        self.angle(t)?;
        quad_adaptive(|s| self.d1(s).unwrap_or(f64::NAN), self.abs_a, t, 1e-12 * (1.0 + t))
    }
    fn d1(&self, t: f64) -> Result<f64> {
        let w = self.angle(t)?;
        if w == 0.0 {
            // limit h′/(|a| sinh w) as w → 0
            return Ok((self.c * self.abs_a.powi(self.n as i32 - 1)).powf(1.0 / self.n as f64) / self.abs_a);
        }
        Ok(self.h_prime(w)? / (self.abs_a * w.sinh()))
    }
    fn d2(&self, t: f64) -> Result<f64> {
        let w = self.angle(t)?;
        if w == 0.0 {
            return Err(GeomError::Domain("second derivative at t = |a| needs a limit".into()));
        }
        // chain rule through t = |a|cosh w, with h″ from (h′ⁿ)′ = nc|a|^{n−1}sinh^{n−1}
        let nm1 = self.n as i32 - 1;
        let (sh, ch) = (w.sinh(), w.cosh());
        let h1 = self.h_prime(w)?;
        let h2 = self.c * self.abs_a.powi(nm1) * sh.powi(nm1) / h1.powi(nm1);
        Ok((h2 * sh - h1 * ch) / (self.abs_a * self.abs_a * sh.powi(3)))
    }
    fn d3(&self, t: f64) -> Result<f64> {
        let h = 1e-3 * (t - self.abs_a).min(t);
        Ok(fd_d1(|s| self.d2(s).unwrap_or(f64::NAN), t, Some(h)))
    }
    fn domain(&self) -> (f64, f64) {
        (self.abs_a, f64::INFINITY)
    }

    fn check_domain(&self, s: f64) -> Result<()> {
        self.angle(s).map(|_| ())
    }
}

/// Residual of `t f′ⁿ + (t² − |a|²) f′^{n−1} f″ − c` (`|a| = 0` for the cone).
pub fn ricci_flat_ode_residual(p: &dyn RadialProfile, n: usize, abs_a: f64, c: f64, t: f64) -> Result<f64> {
    let f1 = p.d1(t)?;
    let f2 = p.d2(t)?;
    Ok(t * f1.powi(n as i32) + (t * t - abs_a * abs_a) * f1.powi(n as i32 - 1) * f2 - c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conifold_power_law() {
        // c₁ = 0: f(t) − f(s) = C(t^k − s^k) with C = (nc/(n−1))^{1/n}·n/(n−1)
        let p = ConifoldProfile::new(3, 1.7, 0.0).unwrap();
        let k = 2.0 / 3.0;
        let cc = (3.0 * 1.7 / 2.0f64).powf(1.0 / 3.0) / k;
        for (t, s) in [(2.0, 0.5), (10.0, 3.0)] {
            let lhs = p.value(t).unwrap() - p.value(s).unwrap();
            assert!((lhs - cc * (t.powf(k) - s.powf(k))).abs() < 1e-12);
        }
    }

    #[test]
    fn conifold_ode_residuals() {
        for (n, c, c1) in [(2, 2.0, 0.0), (3, 1.0, 0.5), (4, 0.3, 2.0)] {
            let p = ConifoldProfile::new(n, c, c1).unwrap();
            for t in [1e-2, 0.3, 1.0, 7.0, 300.0] {
                let r = ricci_flat_ode_residual(&p, n, 0.0, c, t).unwrap();
                let scale = c + t * p.d1(t).unwrap().powi(n as i32);
                assert!(r.abs() < 1e-10 * scale, "n={n} t={t}: {r}");
                let y = t * p.d1(t).unwrap();
                assert!((y.powi(n as i32) - p.radicand(t)).abs() < 1e-10 * p.radicand(t));
            }
        }
    }

    #[test]
    fn conifold_quadrature_matches_derivative() {
        let p = ConifoldProfile::new(3, 1.0, 0.5).unwrap();
        let d = fd_d1(|t| p.value(t).unwrap(), 2.0, Some(1e-3));
        assert!((d - p.d1(2.0).unwrap()).abs() < 1e-9);
        let d3 = fd_d1(|t| p.d2(t).unwrap(), 2.0, Some(1e-3));
        assert!((d3 - p.d3(2.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn conifold_rejects_bad_parameters() {
        assert!(ConifoldProfile::new(1, 1.0, 0.0).is_err());
        assert!(ConifoldProfile::new(3, -1.0, 0.0).is_err());
        assert!(ConifoldProfile::new(3, 1.0, -0.1).is_err());
    }

    #[test]
    fn deformed_n2_closed_form() {
        let p = DeformedProfile::new(2, 0.7, 1.3).unwrap();
        for w in [0.1f64, 1.0, 3.0] {
            let exact = w.cosh() - 1.0;
            assert!((p.sinh_integral(w).unwrap() - exact).abs() < 1e-12 * (1.0 + exact));
            let t = 0.7 * w.cosh();
            let r = ricci_flat_ode_residual(&p, 2, 0.7, 1.3, t).unwrap();
            assert!(r.abs() < 1e-10, "{r}");
        }
        assert_eq!(p.h_prime(0.0).unwrap(), 0.0);
    }

    #[test]
    fn deformed_ode_via_independent_second_derivative() {
        // f″ from differencing f′ rather than from the ODE itself.
        for n in [2, 3, 4] {
            let a = 0.5;
            let p = DeformedProfile::new(n, a, 1.0).unwrap();
            for t in [0.8, 2.0, 10.0] {
                let f1 = p.d1(t).unwrap();
                let f2 = fd_d1(|s| p.d1(s).unwrap(), t, Some(1e-4 * t));
                let r = t * f1.powi(n as i32) + (t * t - a * a) * f1.powi(n as i32 - 1) * f2 - 1.0;
                assert!(r.abs() < 1e-8, "n={n} t={t}: {r}");
            }
        }
    }

    #[test]
    fn deformed_below_boundary_rejected() {
        let p = DeformedProfile::new(3, 1.0, 1.0).unwrap();
        assert!(matches!(p.d1(0.5), Err(GeomError::Domain(_))));
    }

    #[test]
    fn deformed_tends_to_cone() {
        let n = 3;
        let t = 2.0;
        let cone = ConifoldProfile::new(n, 1.0, 0.0).unwrap().d1(t).unwrap();
        let errs: Vec<f64> = [0.2, 0.1, 0.05]
            .iter()
            .map(|&a| (DeformedProfile::new(n, a, 1.0).unwrap().d1(t).unwrap() - cone).abs())
            .collect();
        // halving |a| should cut the error by about 4
        assert!(errs[0] / errs[1] > 3.0 && errs[1] / errs[2] > 3.0, "{errs:?}");
    }
}
