//! Profiles `u(y)` of U(n)-symmetric metrics, handled through `ℓ = ln u`.
//!
//! Every family used here has `ℓ′(y) = y^{n−1}/D(y)` for a polynomial
//! `D(y) = a·y^{n+1} + yⁿ + c₁y + c₀`, so the derivatives of `u` come from
//! a rational function and only `ln u` itself needs a quadrature.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::metrics::RadialProfile;
use crate::numkit::{invert_monotone, quad_adaptive};

const QUAD_TOL: f64 = 1e-14;

/// A monotone profile `u(y) > 0` on an open interval of `y = Σyᵢ`.
pub trait UProfile: Send + Sync {
    /// Complex dimension.
    fn n(&self) -> usize;
    fn domain(&self) -> (f64, f64);
    /// An interior point used to start searches.
    fn reference(&self) -> f64;
    fn ln_u(&self, y: f64) -> Result<f64>;
    /// `[ℓ′, ℓ″, ℓ‴]`.
    fn dlog(&self, y: f64) -> Result<[f64; 3]>;
    /// An antiderivative `Λ` of `ln u`.
    fn int_ln_u(&self, y: f64) -> Result<f64>;
    /// Tag and parameters, for reports.
    fn describe(&self) -> serde_json::Value;

    fn check(&self, y: f64) -> Result<()> {
        let (lo, hi) = self.domain();
        if y > lo && y < hi {
            Ok(())
        } else {
            Err(GeomError::Domain(format!("y = {y} outside profile interval ({lo}, {hi})")))
        }
    }

    /// `[u, u′, u″, u‴]`.
    fn u_jet(&self, y: f64) -> Result<[f64; 4]> {
        let u = self.ln_u(y)?.exp();
        let [l1, l2, l3] = self.dlog(y)?;
        Ok([u, u * l1, u * (l2 + l1 * l1), u * (l3 + 3.0 * l1 * l2 + l1 * l1 * l1)])
    }

    /// Inverse profile `y(u)`.
    fn y_of_u(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) {
            return Err(GeomError::Domain(format!("u = {u} must be positive")));
        }
        let target = u.ln();
        let (lo, hi) = self.domain();
        let lnu = |y: f64| self.ln_u(y).unwrap_or(f64::NAN);
        let (mut a, mut b) = (self.reference(), self.reference());
        let mut tries = 0;
        while !(lnu(a) <= target) {
            a = lo + 0.5 * (a - lo);
            tries += 1;
            if tries > 200 || !(a > lo) {
                return Err(GeomError::Domain(format!("u = {u} below the profile range")));
            }
        }
        tries = 0;
        while !(lnu(b) >= target) {
            b = if hi.is_finite() { hi - 0.5 * (hi - b) } else { 2.0 * b + 1.0 };
            tries += 1;
            if tries > 200 {
                return Err(GeomError::Domain(format!("u = {u} above the profile range")));
            }
        }
        invert_monotone(lnu, target, a, b, 1e-15 * (1.0 + target.abs()))
    }

    /// `φ(y) = y ln u − Λ(y)`, the Kähler potential as a function of `y`.
    fn kahler_potential(&self, y: f64) -> Result<f64> {
        Ok(y * self.ln_u(y)? - self.int_ln_u(y)?)
    }
}

/// `D(y) = a·y^{n+1} + yⁿ + c₁y + c₀`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DPoly {
    pub n: usize,
    pub a: f64,
    pub c1: f64,
    pub c0: f64,
}

impl DPoly {
    /// `[D, D′, D″]`.
    pub fn jet(&self, y: f64) -> [f64; 3] {
        let n = self.n as i32;
        let nf = self.n as f64;
        let d = self.a * y.powi(n + 1) + y.powi(n) + self.c1 * y + self.c0;
        let d1 = (nf + 1.0) * self.a * y.powi(n) + nf * y.powi(n - 1) + self.c1;
        let d2 = (nf + 1.0) * nf * self.a * y.powi(n - 1) + nf * (nf - 1.0) * y.powi(n - 2);
        [d, d1, d2]
    }

    /// `[ℓ′, ℓ″, ℓ‴]` for `ℓ′ = y^{n−1}/D`.
    pub fn ell(&self, y: f64) -> [f64; 3] {
        let n = self.n as i32;
        let nf = self.n as f64;
        let [d, d1, d2] = self.jet(y);
        let num = y.powi(n - 1);
        let num1 = (nf - 1.0) * y.powi(n - 2);
        let num2 = (nf - 1.0) * (nf - 2.0) * y.powi(n - 3);
        let q = num / d;
        let q1 = num1 / d - num * d1 / (d * d);
        let q2 = num2 / d - 2.0 * num1 * d1 / (d * d) - num * d2 / (d * d) + 2.0 * num * d1 * d1 / (d * d * d);
        [q, q1, q2]
    }

    pub fn value(&self, y: f64) -> f64 {
        self.jet(y)[0]
    }
}

/// The Ricci-flat family `u = (yⁿ − bⁿ)^{1/n}` in closed form; `b = 0` is flat space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BProfile {
    pub n: usize,
    pub b: f64,
}

impl BProfile {
    pub fn new(n: usize, b: f64) -> Result<Self> {
        if n == 0 || !(b >= 0.0) {
            return Err(GeomError::Config(format!("b-family needs n ≥ 1 and b ≥ 0 (got n={n}, b={b})")));
        }
        Ok(Self { n, b })
    }

    pub fn flat(n: usize) -> Result<Self> {
        Self::new(n, 0.0)
    }

    fn poly(&self) -> DPoly {
        DPoly { n: self.n, a: 0.0, c1: 0.0, c0: -self.b.powi(self.n as i32) }
    }

    /// `(1/n)Σⱼ (y − bξʲ)(ln(y − bξʲ) − 1)` over the n-th roots of unity,
    /// with conjugate pairs folded into `2[x(ln|l| − 1) − s·arg l]`.
    pub fn root_sum(&self, y: f64) -> f64 {
        let n = self.n;
        let term = |x: f64| x * (x.ln() - 1.0);
        let mut acc = term(y - self.b);
        if self.b == 0.0 {
            return term(y);
        }
        for j in 1..n {
            if 2 * j == n {
                acc += term(y + self.b);
            } else if 2 * j < n {
                let ang = 2.0 * PI * j as f64 / n as f64;
                let (x, s) = (y - self.b * ang.cos(), -self.b * ang.sin());
                let r = x.hypot(s);
                acc += 2.0 * (x * (r.ln() - 1.0) - s * s.atan2(x));
            }
        }
        acc / n as f64
    }
}

impl UProfile for BProfile {
    fn n(&self) -> usize {
        self.n
    }
    fn domain(&self) -> (f64, f64) {
        (self.b, f64::INFINITY)
    }
    fn reference(&self) -> f64 {
        self.b + 1.0
    }
    fn ln_u(&self, y: f64) -> Result<f64> {
        self.check(y)?;
        let n = self.n as i32;
        Ok((y.powi(n) - self.b.powi(n)).ln() / self.n as f64)
    }
    fn dlog(&self, y: f64) -> Result<[f64; 3]> {
        self.check(y)?;
        Ok(self.poly().ell(y))
    }
    fn int_ln_u(&self, y: f64) -> Result<f64> {
        self.check(y)?;
        Ok(self.root_sum(y))
    }
    fn y_of_u(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) {
            return Err(GeomError::Domain(format!("u = {u} must be positive")));
        }
        let n = self.n as i32;
        Ok((u.powi(n) + self.b.powi(n)).powf(1.0 / self.n as f64))
    }
    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "family": "b_family", "n": self.n, "b": self.b })
    }
}

/// `ln u = ∫ y^{n−1}dy / D(y)` by adaptive quadrature on a working interval
/// where `D > 0`, anchored at `y₀ = 1` (or the interval midpoint if 1 is
/// outside) with `ln u(y₀) = ln D(y₀)/n` and `Λ(y₀) = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuadratureProfile {
    pub poly: DPoly,
    pub lo: f64,
    pub hi: f64,
    pub anchor: f64,
    ln_u_anchor: f64,
}

impl QuadratureProfile {
    pub fn new(poly: DPoly, lo: f64, hi: f64) -> Result<Self> {
        if poly.n == 0 || !(lo > 0.0) || !(hi > lo) || !hi.is_finite() {
            return Err(GeomError::Config(format!(
                "need n ≥ 1 and a finite working interval 0 < lo < hi (got n={}, [{lo}, {hi}])",
                poly.n
            )));
        }
        if let Some(root) = find_root(&poly, lo, hi) {
            return Err(GeomError::DenominatorRoot { root });
        }
        if !(poly.value(0.5 * (lo + hi)) > 0.0) {
            return Err(GeomError::Domain("denominator negative on the working interval".into()));
        }
        let anchor = if lo < 1.0 && 1.0 < hi { 1.0 } else { 0.5 * (lo + hi) };
        let ln_u_anchor = poly.value(anchor).ln() / poly.n as f64;
        Ok(Self { poly, lo, hi, anchor, ln_u_anchor })
    }

    fn ell1(&self, y: f64) -> f64 {
        y.powi(self.poly.n as i32 - 1) / self.poly.value(y)
    }
}

/// First sign change of `D` on `[lo, hi]` (or a zero at a sample), refined by bisection.
fn find_root(poly: &DPoly, lo: f64, hi: f64) -> Option<f64> {
    const SAMPLES: usize = 4000;
    let f = |y: f64| poly.value(y);
    let mut prev = (lo, f(lo));
    if prev.1 == 0.0 {
        return Some(lo);
    }
    for k in 1..=SAMPLES {
        let y = lo + (hi - lo) * k as f64 / SAMPLES as f64;
        let v = f(y);
        if v == 0.0 {
            return Some(y);
        }
        if v.signum() != prev.1.signum() {
            return invert_monotone(f, 0.0, prev.0, y, 0.0).ok().or(Some(0.5 * (prev.0 + y)));
        }
        prev = (y, v);
    }
    None
}

impl UProfile for QuadratureProfile {
    fn n(&self) -> usize {
        self.poly.n
    }
    fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }
    fn reference(&self) -> f64 {
        self.anchor
    }
    fn ln_u(&self, y: f64) -> Result<f64> {
        self.check(y)?;
        Ok(self.ln_u_anchor + quad_adaptive(|s| self.ell1(s), self.anchor, y, QUAD_TOL)?)
    }
    fn dlog(&self, y: f64) -> Result<[f64; 3]> {
        self.check(y)?;
        Ok(self.poly.ell(y))
    }
    fn int_ln_u(&self, y: f64) -> Result<f64> {
        // ∫ ln u = [s ln u] − ∫ s ℓ′(s) ds
        let tail = quad_adaptive(|s| s * self.ell1(s), self.anchor, y, QUAD_TOL)?;
        Ok(y * self.ln_u(y)? - self.anchor * self.ln_u_anchor - tail)
    }
    fn describe(&self) -> serde_json::Value {
        serde_json::json!({
            "family": "quadrature",
            "n": self.poly.n, "a": self.poly.a, "c1": self.poly.c1, "c0": self.poly.c0,
            "interval": [self.lo, self.hi], "anchor": self.anchor,
        })
    }
}

/// Kähler–Einstein profile `ρ = λω`: `D = −λ/(n+1)·y^{n+1} + yⁿ + C₁`.
pub fn einstein_profile(n: usize, lambda: f64, c1: f64, interval: (f64, f64)) -> Result<QuadratureProfile> {
    let poly = DPoly { n, a: -lambda / (n as f64 + 1.0), c1: 0.0, c0: c1 };
    QuadratureProfile::new(poly, interval.0, interval.1)
}

/// Constant scalar curvature `R`: `D = −R/(n+1)·y^{n+1} + yⁿ + C₁y + C₂`.
pub fn csc_profile(n: usize, r: f64, c1: f64, c2: f64, interval: (f64, f64)) -> Result<QuadratureProfile> {
    let poly = DPoly { n, a: -r / (n as f64 + 1.0), c1, c0: c2 };
    QuadratureProfile::new(poly, interval.0, interval.1)
}

/// The Kähler potential `φ(u)` of a `u`-profile, with
/// `φ′ = y/u`, `φ″ = (y′u − y)/u²`, `φ‴ = y″/u − 2(y′u − y)/u³`
/// where `y′ = 1/u′(y)` and `y″ = −u″/u′³`.
pub struct KahlerPotential<P> {
    pub profile: P,
}

impl<P: UProfile> KahlerPotential<P> {
    pub fn new(profile: P) -> Self {
        Self { profile }
    }

    /// `[y, y′(u), y″(u)]` at `u`.
    pub fn y_jet(&self, u: f64) -> Result<[f64; 3]> {
        let y = self.profile.y_of_u(u)?;
        let [_, u1, u2, _] = self.profile.u_jet(y)?;
        Ok([y, 1.0 / u1, -u2 / (u1 * u1 * u1)])
    }
}

impl<P: UProfile> RadialProfile for KahlerPotential<P> {
    fn value(&self, u: f64) -> Result<f64> {
        let y = self.profile.y_of_u(u)?;
        self.profile.kahler_potential(y)
    }
    fn d1(&self, u: f64) -> Result<f64> {
        Ok(self.profile.y_of_u(u)? / u)
    }
    fn d2(&self, u: f64) -> Result<f64> {
        let [y, y1, _] = self.y_jet(u)?;
        Ok((y1 * u - y) / (u * u))
    }
    fn d3(&self, u: f64) -> Result<f64> {
        let [y, y1, y2] = self.y_jet(u)?;
        Ok(y2 / u - 2.0 * (y1 * u - y) / (u * u * u))
    }
    fn domain(&self) -> (f64, f64) {
        let (lo, hi) = self.profile.domain();
        // endpoints nudged inside, where ln u is still defined
        let at = |y: f64, fallback: f64| self.profile.ln_u(y).map(f64::exp).unwrap_or(fallback);
        let ulo = if lo > 0.0 { at(lo * (1.0 + 1e-12), 0.0) } else { 0.0 };
        let uhi = if hi.is_finite() { at(hi * (1.0 - 1e-12), f64::INFINITY) } else { f64::INFINITY };
        (ulo, uhi)
    }
}

impl<P: UProfile + ?Sized> UProfile for std::sync::Arc<P> {
    fn n(&self) -> usize {
        (**self).n()
    }
    fn domain(&self) -> (f64, f64) {
        (**self).domain()
    }
    fn reference(&self) -> f64 {
        (**self).reference()
    }
    fn ln_u(&self, y: f64) -> Result<f64> {
        (**self).ln_u(y)
    }
    fn dlog(&self, y: f64) -> Result<[f64; 3]> {
        (**self).dlog(y)
    }
    fn int_ln_u(&self, y: f64) -> Result<f64> {
        (**self).int_ln_u(y)
    }
    fn describe(&self) -> serde_json::Value {
        (**self).describe()
    }
    fn y_of_u(&self, u: f64) -> Result<f64> {
        (**self).y_of_u(u)
    }
}
