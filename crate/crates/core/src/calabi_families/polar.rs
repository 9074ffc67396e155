//! Real polar forms of the Eguchi–Hanson and P¹×P¹ metrics, the Z_n
//! quotient chart of the b-family, and the O(−2,−2) blow-down.
//!
//! Real metrics in this file use `g = Re(X·H·Ȳ)`, so that `|dz|²` has
//! unit coefficient.

use serde::{Deserialize, Serialize};

use super::{family_metric, AnsatzFamily, FamilyKind};
use crate::error::{GeomError, Result};
use crate::metrics::real_metric;
use crate::numkit::{cnorm_sqr, fd_jacobian, CMatrix, RMatrix, C64};
use crate::toric_hessian::UProfile;

/// How the fiber angle `β` of `w` is expressed through the polar angles.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AngleMap {
    /// `ψ = 2β − φ` (Eguchi–Hanson) and `ψ = θ₁ + θ₂ − 2β` (P¹×P¹), as written.
    Printed,
    /// `ψ = −2β − φ` and `ψ = −2β − φ₁ − φ₂`, which turn `r²y′(dβ + …)²`
    /// into `¼uy′(dψ + cosθ dφ + …)²`.
    Derived,
}

fn half_real(h: &CMatrix) -> RMatrix {
    real_metric(h).scale(0.5)
}

fn flatten(z: &[C64]) -> Vec<f64> {
    z.iter().flat_map(|w| [w.re, w.im]).collect()
}

/// `JᵀgJ` for the real Jacobian of `coords ↦ chart`.
fn pushforward(f: &AnsatzFamily, chart: impl Fn(&[f64]) -> Result<Vec<C64>>, coords: &[f64]) -> Result<RMatrix> {
    let z = chart(coords)?;
    let g = half_real(&family_metric(f, &z)?);
    let jac =
        fd_jacobian(|c| chart(c).map(|z| flatten(&z)).unwrap_or_else(|_| vec![f64::NAN; 2 * z.len()]), coords, None)?;
    let m = coords.len();
    let j = |a: usize, i: usize| jac[a][i];
    Ok(RMatrix::from_fn(m, |p, q| {
        let mut acc = 0.0;
        for a in 0..2 * z.len() {
            for b in 0..2 * z.len() {
                acc += j(a, p) * g[(a, b)] * j(b, q);
            }
        }
        acc
    }))
}

/// `(1−b²/s⁴)⁻¹ds² + (s²/4)(1−b²/s⁴)(dψ + cosθdφ)² + (s²/4)(dθ² + sin²θdφ²)`
/// in the order `(s, θ, φ, ψ)`.
pub fn eh_polar_metric(b: f64, s: f64, theta: f64, _phi: f64, _psi: f64) -> Result<RMatrix> {
    let s4 = s.powi(4);
    if !(s4 > b * b) {
        return Err(GeomError::Domain(format!("s⁴ = {s4} must exceed b² = {}", b * b)));
    }
    let f = 1.0 - b * b / s4;
    let (fib, base) = (0.25 * s * s * f, 0.25 * s * s);
    let (c, sn) = (theta.cos(), theta.sin());
    let mut g = RMatrix::zeros(4);
    g[(0, 0)] = 1.0 / f;
    g[(1, 1)] = base;
    g[(2, 2)] = base * sn * sn + fib * c * c;
    g[(3, 3)] = fib;
    g[(2, 3)] = fib * c;
    g[(3, 2)] = fib * c;
    Ok(g)
}

/// `dr² + (r²/4)((dθ² + sin²θdφ²) + (dψ + cosθdφ)²)`.
pub fn eh_cone_metric(r: f64, theta: f64) -> RMatrix {
    let q = 0.25 * r * r;
    let c = theta.cos();
    let mut g = RMatrix::zeros(4);
    g[(0, 0)] = 1.0;
    g[(1, 1)] = q;
    g[(2, 2)] = q * theta.sin().powi(2) + q * c * c;
    g[(3, 3)] = q;
    g[(2, 3)] = q * c;
    g[(3, 2)] = q * c;
    g
}

/// `(z, w)` with `z = e^{iφ}tan(θ/2)`, `w = r cos(θ/2)e^{iβ}`, `r⁴ = s⁴ − b²`.
pub fn eh_chart_point(b: f64, coords: &[f64], map: AngleMap) -> Result<Vec<C64>> {
    let [s, theta, phi, psi] = [coords[0], coords[1], coords[2], coords[3]];
    let r4 = s.powi(4) - b * b;
    if !(r4 > 0.0) {
        return Err(GeomError::Domain(format!("s⁴ − b² = {r4} ≤ 0")));
    }
    let beta = match map {
        AngleMap::Printed => 0.5 * (psi + phi),
        AngleMap::Derived => -0.5 * (psi + phi),
    };
    let r = r4.powf(0.25);
    Ok(vec![C64::from_polar((0.5 * theta).tan(), phi), C64::from_polar(r * (0.5 * theta).cos(), beta)])
}

/// The Eguchi–Hanson family metric `(a, C₁ = 1, C₂ = b²)` pulled back to
/// `(s, θ, φ, ψ)`.
pub fn eh_pushforward(f: &AnsatzFamily, coords: &[f64], map: AngleMap) -> Result<RMatrix> {
    let b = match f.kind {
        FamilyKind::Eh { c1: 1.0, c2, .. } => c2.sqrt(),
        _ => return Err(GeomError::Config("polar form needs an EH family with C₁ = 1".into())),
    };
    pushforward(f, |c| eh_chart_point(b, c, map), coords)
}

/// `y′dr² + Σ¼(aⱼ+y)(dθⱼ² + sin²θⱼdφⱼ²) + ¼uy′(dψ + cosθ₁dφ₁ + cosθ₂dφ₂)²`
/// in the order `(r, θ₁, φ₁, θ₂, φ₂, ψ)`, with `u = r²` and `y′ = dy/du`.
pub fn p1p1_polar_metric(a1: f64, a2: f64, p: &dyn UProfile, coords: &[f64]) -> Result<RMatrix> {
    let r = coords[0];
    let u = r * r;
    let y = p.y_of_u(u)?;
    let y1 = 1.0 / p.u_jet(y)?[1];
    let fib = 0.25 * u * y1;
    let a = [a1, a2];
    let th = [coords[1], coords[3]];
    let mut g = RMatrix::zeros(6);
    g[(0, 0)] = y1;
    // indices of (θⱼ, φⱼ)
    let idx = [(1, 2), (3, 4)];
    let mut ang = [0.0; 6];
    ang[5] = 1.0;
    for j in 0..2 {
        let (it, ip) = idx[j];
        let base = 0.25 * (a[j] + y);
        g[(it, it)] = base;
        g[(ip, ip)] = base * th[j].sin().powi(2);
        ang[ip] = th[j].cos();
    }
    for i in 0..6 {
        for k in 0..6 {
            g[(i, k)] += fib * ang[i] * ang[k];
        }
    }
    Ok(g)
}

/// `zⱼ = e^{iφⱼ}tan(θⱼ/2)`, `w = r cos(θ₁/2)cos(θ₂/2)e^{iβ}`.
pub fn p1p1_chart_point(coords: &[f64], map: AngleMap) -> Vec<C64> {
    let [r, t1, p1, t2, p2, psi] = [coords[0], coords[1], coords[2], coords[3], coords[4], coords[5]];
    let beta = match map {
        AngleMap::Printed => 0.5 * (t1 + t2 - psi),
        AngleMap::Derived => -0.5 * (psi + p1 + p2),
    };
    vec![
        C64::from_polar((0.5 * t1).tan(), p1),
        C64::from_polar((0.5 * t2).tan(), p2),
        C64::from_polar(r * (0.5 * t1).cos() * (0.5 * t2).cos(), beta),
    ]
}

pub fn p1p1_pushforward(f: &AnsatzFamily, coords: &[f64], map: AngleMap) -> Result<RMatrix> {
    if !matches!(f.kind, FamilyKind::P1p1 { .. }) {
        return Err(GeomError::Config("polar form needs a P1P1 chart".into()));
    }
    pushforward(f, |c| Ok(p1p1_chart_point(c, map)), coords)
}

/// `v = z₁ⁿ`, `wⱼ = zⱼ/z₁`.
pub fn quotient_map(n: usize, z: &[C64]) -> Result<Vec<C64>> {
    if z.len() != n {
        return Err(GeomError::Config(format!("expected {n} coordinates")));
    }
    if z[0].norm() == 0.0 {
        return Err(GeomError::Chart("z₁ = 0 is outside the quotient chart".into()));
    }
    let mut out = vec![z[0].powu(n as u32)];
    out.extend(z[1..].iter().map(|w| w / z[0]));
    Ok(out)
}

/// The closed-form quotient metric in `(v, w₂, …, wₙ)` with
/// `Q = |v|²(1+|w|²)ⁿ + bⁿ`.
pub fn quotient_display(n: usize, b: f64, q: &[C64]) -> CMatrix {
    let nf = n as f64;
    let v = q[0];
    let w = &q[1..];
    let rho = 1.0 + cnorm_sqr(w);
    let big = v.norm_sqr() * rho.powi(n as i32) + b.powi(n as i32);
    let qm = big.powf((nf - 1.0) / nf);
    CMatrix::from_fn(n, |i, j| match (i, j) {
        (0, 0) => C64::new(rho.powi(n as i32) / (nf * nf * qm), 0.0),
        (0, j) => v.conj() * w[j - 1] * (rho.powi(n as i32 - 1) / (nf * qm)),
        (i, 0) => v * w[i - 1].conj() * (rho.powi(n as i32 - 1) / (nf * qm)),
        (i, j) => {
            let d = if i == j { big.powf(1.0 / nf) / rho } else { 0.0 };
            C64::new(d, 0.0) - w[i - 1].conj() * w[j - 1] * (b.powi(n as i32) / (rho * rho * qm))
        }
    })
}

/// `x = (ny₁, y₂ − y₁, …, yₙ − y₁)`, the torus coordinates as written for
/// the quotient.
pub fn quotient_printed_coords(y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut x = vec![n as f64 * y[0]];
    x.extend(y[1..].iter().map(|v| v - y[0]));
    x
}

/// Which coefficient of `dv∧dv̄` to use in the zero-section form.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZeroSectionVariant {
    /// `P/(6a₁a₂)`, `P = (1+|z₁|²)(1+|z₂|²)`, as written.
    Printed,
    /// `P²/(6a₁a₂)`, from `uy′/(4|v|²)` with `y ≈ u²/(3a₁a₂)`.
    Derived,
}

/// Leading behaviour of the O(−2,−2) metric as `v → 0`.
pub fn zero_section_form(a1: f64, a2: f64, q: &[C64], variant: ZeroSectionVariant) -> CMatrix {
    let (z1, z2, v) = (q[0], q[1], q[2]);
    let (s1, s2) = (1.0 + z1.norm_sqr(), 1.0 + z2.norm_sqr());
    let p = s1 * s2;
    let k = 3.0 * a1 * a2;
    let v2 = v.norm_sqr();
    let a = [a1, a2];
    let s = [s1, s2];
    let z = [z1, z2];
    let mut h = CMatrix::zeros(3);
    for j in 0..2 {
        let num = a[j] + v2 * p * p / k + z[j].norm_sqr() * 2.0 * v2 * p * p / k;
        h[(j, j)] = C64::new(num / (s[j] * s[j]), 0.0);
        let other = s[1 - j];
        // coefficient of dv∧dz̄ⱼ
        h[(2, j)] = v.conj() * z[j] * (other * p / k);
        h[(j, 2)] = h[(2, j)].conj();
    }
    h[(0, 1)] = z1.conj() * z2 * (2.0 * v2 * p / k);
    h[(1, 0)] = h[(0, 1)].conj();
    let vv = match variant {
        ZeroSectionVariant::Printed => p,
        ZeroSectionVariant::Derived => p * p,
    };
    h[(2, 2)] = C64::new(vv / (2.0 * k), 0.0);
    h
}

/// The P¹×P¹ metric in the chart `(z₁, z₂, v = w²)` of O(−2,−2).
pub fn blowdown_o22(a1: f64, a2: f64, q: &[C64]) -> Result<CMatrix> {
    if !(a1 > 0.0 && a2 > 0.0) {
        return Err(GeomError::Config("blow-down to O(−2,−2) needs a₁a₂ > 0".into()));
    }
    let f = AnsatzFamily::new(FamilyKind::O22 { a1, a2 })?;
    family_metric(&f, q)
}
