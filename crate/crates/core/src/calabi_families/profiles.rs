//! Closed-form `u(y)` profiles of the Calabi-ansatz families.
//!
//! Each profile factors `u` (up to a constant) as a product of powers of
//! linear factors `y − β`, so `ln u`, its derivatives and `Λ = ∫ln u dy`
//! are finite sums. Complex conjugate roots are folded into real
//! `ln|·|`/`atan2` expressions.

use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::numkit::solve_cubic;
use crate::toric_hessian::UProfile;

/// A factor `(y − p)` (with `q = 0`) or a conjugate pair `(y − p)² + q²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Factor {
    pub p: f64,
    pub q: f64,
}

impl Factor {
    fn real(p: f64) -> Self {
        Self { p, q: 0.0 }
    }

    /// `[ln f, (ln f)′, (ln f)″, (ln f)‴]` with the pair counted twice.
    fn jet(&self, y: f64) -> Result<[f64; 4]> {
        let x = y - self.p;
        if self.q == 0.0 {
            if !(x > 0.0) {
                return Err(GeomError::Domain(format!("factor y − {} ≤ 0 at y = {y}", self.p)));
            }
            Ok([x.ln(), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x)])
        } else {
            let q2 = self.q * self.q;
            let r2 = x * x + q2;
            Ok([r2.ln(), 2.0 * x / r2, 2.0 * (q2 - x * x) / (r2 * r2), 4.0 * x * (x * x - 3.0 * q2) / (r2 * r2 * r2)])
        }
    }

    /// `∫ln f dy`.
    fn antiderivative(&self, y: f64) -> Result<f64> {
        let x = y - self.p;
        if self.q == 0.0 {
            if !(x > 0.0) {
                return Err(GeomError::Domain(format!("factor y − {} ≤ 0 at y = {y}", self.p)));
            }
            Ok(x * (x.ln() - 1.0))
        } else {
            let r = x.hypot(self.q);
            Ok(2.0 * (x * (r.ln() - 1.0) - self.q * self.q.atan2(x)))
        }
    }
}

/// `ln u = Σ wₖ ln fₖ(y) + c·y + k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
struct Factored {
    terms: Vec<(f64, Factor)>,
    slope: f64,
    offset: f64,
}

impl Factored {
    fn dlog(&self, y: f64) -> Result<[f64; 4]> {
        let mut acc = [self.offset + self.slope * y, self.slope, 0.0, 0.0];
        for (w, f) in &self.terms {
            let j = f.jet(y)?;
            for k in 0..4 {
                acc[k] += w * j[k];
            }
        }
        Ok(acc)
    }

    fn antiderivative(&self, y: f64) -> Result<f64> {
        let mut acc = self.offset * y + 0.5 * self.slope * y * y;
        for (w, f) in &self.terms {
            acc += w * f.antiderivative(y)?;
        }
        Ok(acc)
    }
}

/// The nonzero roots `β±` of `y³ + (3/2)(a₁+a₂)y² + 3a₁a₂y`, from the
/// cubic solver. Roots that vanish to rounding are returned as exact zeros.
pub fn beta_roots(a1: f64, a2: f64) -> Result<[Factor; 2]> {
    if !(a1 >= 0.0 && a2 >= 0.0) {
        return Err(GeomError::Config(format!("need a₁, a₂ ≥ 0 (got {a1}, {a2})")));
    }
    let mut roots = solve_cubic(1.0, 1.5 * (a1 + a2), 3.0 * a1 * a2, 0.0)?.to_vec();
    roots.sort_by(|x, y| x.norm().total_cmp(&y.norm()));
    let scale = 1.0 + a1 + a2;
    let clean = |v: f64| if v.abs() < 1e-13 * scale { 0.0 } else { v };
    let (b1, b2) = (roots[1], roots[2]);
    if b1.im != 0.0 {
        let f = Factor { p: clean(b1.re), q: b1.im.abs() };
        Ok([f, Factor { p: f.p, q: -f.q }])
    } else {
        Ok([Factor::real(clean(b1.re)), Factor::real(clean(b2.re))])
    }
}

/// Ricci-flat profile of the Calabi ansatz over P¹×P¹ (and, with `a₂ = 0`,
/// over P¹): `y` is the positive root of `y³ + (3/2)(a₁+a₂)y² + 3a₁a₂y = u²`,
/// equivalently `(a₁+y)(a₂+y)y′(u) = (2/3)u`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CubicProfile {
    pub a1: f64,
    pub a2: f64,
    /// Fiber dimension, reported as [`UProfile::n`].
    pub fiber: usize,
    pub beta: [Factor; 2],
    ln_u: Factored,
}

impl CubicProfile {
    pub fn new(a1: f64, a2: f64, fiber: usize) -> Result<Self> {
        let beta = beta_roots(a1, a2)?;
        let mut terms = vec![(0.5, Factor::real(0.0))];
        if beta[0].q != 0.0 {
            terms.push((0.5, beta[0]));
        } else {
            terms.extend(beta.iter().map(|b| (0.5, *b)));
        }
        Ok(Self { a1, a2, fiber, beta, ln_u: Factored { terms, slope: 0.0, offset: 0.0 } })
    }

    /// `Q(y) = y³ + (3/2)(a₁+a₂)y² + 3a₁a₂y` and its first three derivatives.
    pub fn cubic(&self, y: f64) -> [f64; 4] {
        let (s, p) = (1.5 * (self.a1 + self.a2), 3.0 * self.a1 * self.a2);
        [((y + s) * y + p) * y, (3.0 * y + 2.0 * s) * y + p, 6.0 * y + 2.0 * s, 6.0]
    }

    /// `(a₁+y)(a₂+y)y′ − (2/3)u` at `u`.
    pub fn ode_residual(&self, u: f64) -> Result<f64> {
        let y = self.y_of_u(u)?;
        let [_, u1, _, _] = self.u_jet(y)?;
        Ok((self.a1 + y) * (self.a2 + y) / u1 - 2.0 * u / 3.0)
    }
}

impl UProfile for CubicProfile {
    fn n(&self) -> usize {
        self.fiber
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn reference(&self) -> f64 {
        1.0
    }
    fn ln_u(&self, y: f64) -> Result<f64> {
        self.check(y)?;
        Ok(self.ln_u.dlog(y)?[0])
    }
    fn dlog(&self, y: f64) -> Result<[f64; 3]> {
        self.check(y)?;
        let [_, a, b, c] = self.ln_u.dlog(y)?;
        Ok([a, b, c])
    }
    fn int_ln_u(&self, y: f64) -> Result<f64> {
        self.check(y)?;
        self.ln_u.antiderivative(y)
    }
    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "family": "cubic", "a1": self.a1, "a2": self.a2, "beta": self.beta })
    }
    fn y_of_u(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) {
            return Err(GeomError::Domain(format!("u = {u} must be positive")));
        }
        let (c2, c1) = (1.5 * (self.a1 + self.a2), 3.0 * self.a1 * self.a2);
        let roots = solve_cubic(1.0, c2, c1, -u * u)?;
        let positive: Vec<f64> = roots.iter().filter(|r| r.im == 0.0 && r.re > 0.0).map(|r| r.re).collect();
        if positive.len() > 1 {
            return Err(GeomError::Evaluation(format!("{} positive cubic roots at u = {u}", positive.len())));
        }
        // the closed-form root loses relative accuracy for tiny u; polish ln Q = 2 ln u
        let mut y = match positive.first() {
            Some(&r) => r,
            None if c1 > 0.0 => u * u / c1,
            None => u.powf(2.0 / 3.0),
        };
        let target = 2.0 * u.ln();
        for _ in 0..60 {
            let [q, q1, _, _] = self.cubic(y);
            let step = (q.ln() - target) * q / q1;
            let next = if y - step > 0.0 { y - step } else { 0.5 * y };
            let done = (next - y).abs() <= 1e-16 * y;
            y = next;
            if done {
                break;
            }
        }
        if !(y > 0.0) || !y.is_finite() {
            return Err(GeomError::Evaluation(format!("no positive cubic root at u = {u}")));
        }
        Ok(y)
    }
}

/// Eguchi–Hanson type profile `y = −a + √(C₁u² + C₂)`, i.e.
/// `u² = ((y+a)² − C₂)/C₁`, solving `(a+y)y′(u) = C₁u`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EhProfile {
    pub a: f64,
    pub c1: f64,
    pub c2: f64,
    ln_u: Factored,
}

impl EhProfile {
    pub fn new(a: f64, c1: f64, c2: f64) -> Result<Self> {
        if !(a >= 0.0 && c1 > 0.0 && c2 >= 0.0) {
            return Err(GeomError::Config(format!("need a ≥ 0, C₁ > 0, C₂ ≥ 0 (got {a}, {c1}, {c2})")));
        }
        let s = c2.sqrt();
        let terms = vec![(0.5, Factor::real(s - a)), (0.5, Factor::real(-s - a))];
        Ok(Self { a, c1, c2, ln_u: Factored { terms, slope: 0.0, offset: -0.5 * c1.ln() } })
    }

    pub fn ode_residual(&self, u: f64) -> Result<f64> {
        let y = self.y_of_u(u)?;
        let u1 = self.u_jet(y)?[1];
        Ok((self.a + y) / u1 - self.c1 * u)
    }
}

impl UProfile for EhProfile {
    fn n(&self) -> usize {
        1
    }
    fn domain(&self) -> (f64, f64) {
        (self.c2.sqrt() - self.a, f64::INFINITY)
    }
    fn reference(&self) -> f64 {
        self.c2.sqrt() - self.a + 1.0
    }
    fn ln_u(&self, y: f64) -> Result<f64> {
        self.check(y)?;
        Ok(self.ln_u.dlog(y)?[0])
    }
    fn dlog(&self, y: f64) -> Result<[f64; 3]> {
        self.check(y)?;
        let [_, a, b, c] = self.ln_u.dlog(y)?;
        Ok([a, b, c])
    }
    fn int_ln_u(&self, y: f64) -> Result<f64> {
        self.check(y)?;
        self.ln_u.antiderivative(y)
    }
    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "family": "eguchi_hanson", "a": self.a, "c1": self.c1, "c2": self.c2 })
    }
    fn y_of_u(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) {
            return Err(GeomError::Domain(format!("u = {u} must be positive")));
        }
        Ok(-self.a + (self.c1 * u * u + self.c2).sqrt())
    }
}

/// The Kepler potential `φ = u^{1/2}` lifted to the resolved chart:
/// `y = ½u^{1/2}`, so `u = 4y²`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KeplerLiftProfile;

impl UProfile for KeplerLiftProfile {
    fn n(&self) -> usize {
        2
    }
    fn domain(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn reference(&self) -> f64 {
        1.0
    }
    fn ln_u(&self, y: f64) -> Result<f64> {
        self.check(y)?;
        Ok(4f64.ln() + 2.0 * y.ln())
    }
    fn dlog(&self, y: f64) -> Result<[f64; 3]> {
        self.check(y)?;
        Ok([2.0 / y, -2.0 / (y * y), 4.0 / (y * y * y)])
    }
    fn int_ln_u(&self, y: f64) -> Result<f64> {
        self.check(y)?;
        Ok(y * 4f64.ln() + 2.0 * y * (y.ln() - 1.0))
    }
    fn describe(&self) -> serde_json::Value {
        serde_json::json!({ "family": "kepler_lift" })
    }
    fn y_of_u(&self, u: f64) -> Result<f64> {
        if !(u > 0.0) {
            return Err(GeomError::Domain(format!("u = {u} must be positive")));
        }
        Ok(0.5 * u.sqrt())
    }
}
