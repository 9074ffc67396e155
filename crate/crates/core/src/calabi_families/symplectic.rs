//! Symplectic data of the families: `G_ij`, `G^{ij}` and the complex
//! potentials `ψ = Σ cᵢlᵢ(ln lᵢ − 1)` in the closed forms available for
//! each Ricci-flat (or Kepler) profile.

use std::f64::consts::PI;

use super::{AnsatzFamily, FamilyKind};
use crate::error::{GeomError, Result};
use crate::numkit::RMatrix;
use crate::toric_hessian::{metric_g, AffineForm, ComplexPotential, LogTerm, UProfile};

fn boundary(what: &str, v: f64) -> GeomError {
    GeomError::Boundary(format!("{what} = {v:e} ≤ 0"))
}

fn positive(what: &str, v: f64) -> Result<f64> {
    if v > 0.0 {
        Ok(v)
    } else {
        Err(boundary(what, v))
    }
}

/// Base coordinate `y₀` (shift `a`) and fiber coordinates `y₁…y_m`.
fn resolved_g(a: f64, p: &dyn UProfile, y: &[f64]) -> Result<(RMatrix, RMatrix)> {
    let m = y.len() - 1;
    let y0 = y[0];
    let total: f64 = y[1..].iter().sum();
    let s = positive("y − y₀", total - y0)?;
    let t = positive("y₀ + a", y0 + a)?;
    for v in &y[1..] {
        positive("fiber moment", *v)?;
    }
    p.check(total)?;
    let l1 = p.dlog(total)?[0];
    let k = 1.0 / l1;
    let lower = RMatrix::from_fn(m + 1, |i, j| match (i, j) {
        (0, 0) => 1.0 / t + 1.0 / s,
        (0, _) | (_, 0) => -1.0 / s,
        _ => l1 + 1.0 / s - 1.0 / total - 1.0 / (total + a) + if i == j { 1.0 / y[i] } else { 0.0 },
    });
    let upper = RMatrix::from_fn(m + 1, |i, j| match (i, j) {
        (0, 0) => s * t / (total + a) + t * t / ((total + a) * (total + a)) * k,
        (0, j) | (j, 0) => t * y[j] / (total * (total + a)) * k,
        _ => {
            let d = if i == j { y[i] } else { 0.0 };
            d - y[i] * y[j] / total + k * y[i] * y[j] / (total * total)
        }
    });
    Ok((lower, upper))
}

/// `(y₁, y₂, y₃)` with base shifts `a₁, a₂` and `y = y₃`.
fn p1p1_g(a: [f64; 2], p: &dyn UProfile, y: &[f64]) -> Result<(RMatrix, RMatrix)> {
    let total = y[2];
    positive("y₃", total)?;
    for j in 0..2 {
        positive("yⱼ + aⱼ", y[j] + a[j])?;
        positive("y₃ − yⱼ", total - y[j])?;
    }
    p.check(total)?;
    let l1 = p.dlog(total)?[0];
    let k = 1.0 / l1;
    let lower = RMatrix::from_fn(3, |i, j| match (i, j) {
        (2, 2) => l1 + (0..2).map(|m| 1.0 / (total - y[m]) - 1.0 / (total + a[m])).sum::<f64>(),
        (m, 2) | (2, m) => -1.0 / (total - y[m]),
        (m, n) if m == n => 1.0 / (y[m] + a[m]) + 1.0 / (total - y[m]),
        _ => 0.0,
    });
    let c = [(y[0] + a[0]) / (total + a[0]), (y[1] + a[1]) / (total + a[1]), 1.0];
    let upper = RMatrix::from_fn(3, |i, j| {
        let d = if i == j && i < 2 { (total - y[i]) * (y[i] + a[i]) / (total + a[i]) } else { 0.0 };
        d + k * c[i] * c[j]
    });
    Ok((lower, upper))
}

/// `y = Mx` for the quotient chart: `y₁ = n x₁ − Σ_{j≥2}x_j`, `y_j = x_j`.
pub(super) fn quotient_matrix(n: usize) -> (RMatrix, RMatrix) {
    let m = RMatrix::from_fn(n, |i, j| match (i, j) {
        (0, 0) => n as f64,
        (0, _) => -1.0,
        _ => {
            if i == j {
                1.0
            } else {
                0.0
            }
        }
    });
    let minv = RMatrix::from_fn(n, |i, j| {
        if i == 0 {
            1.0 / n as f64
        } else if i == j {
            1.0
        } else {
            0.0
        }
    });
    (m, minv)
}

fn o22_matrix() -> (RMatrix, RMatrix) {
    (RMatrix::diag(&[1.0, 1.0, 2.0]), RMatrix::diag(&[1.0, 1.0, 0.5]))
}

/// `(MᵀGM, M⁻¹G⁻¹M⁻ᵀ)` for `y = Mx`.
fn transform(g: (RMatrix, RMatrix), m: &RMatrix, minv: &RMatrix) -> (RMatrix, RMatrix) {
    let (lower, upper) = g;
    (m.transpose().matmul(&lower).matmul(m), minv.matmul(&upper).matmul(&minv.transpose()))
}

/// `(G_ij, G^{ij})` in the moment coordinates of [`AnsatzFamily::moment`].
pub fn family_g(f: &AnsatzFamily, y: &[f64]) -> Result<(RMatrix, RMatrix)> {
    if y.len() != f.dim() {
        return Err(GeomError::Config(format!("expected {} moment coordinates, got {}", f.dim(), y.len())));
    }
    let p = f.profile.as_ref();
    match f.kind {
        FamilyKind::UnRf { .. } => metric_g(p, y),
        FamilyKind::QuotientOn { n, .. } => {
            let (m, minv) = quotient_matrix(n);
            let native = m.matvec(y);
            Ok(transform(metric_g(p, &native)?, &m, &minv))
        }
        FamilyKind::Eh { a, .. } => resolved_g(a, p, y),
        FamilyKind::Resolved3 { a } => resolved_g(a, p, y),
        FamilyKind::KeplerK3Lift | FamilyKind::KrfK3 => resolved_g(0.0, p, y),
        FamilyKind::P1p1 { a1, a2 } => p1p1_g([a1, a2], p, y),
        FamilyKind::O22 { a1, a2 } => {
            let (m, minv) = o22_matrix();
            Ok(transform(p1p1_g([a1, a2], p, &m.matvec(y))?, &m, &minv))
        }
    }
}

fn form(coeffs: &[f64], constant: f64) -> AffineForm {
    AffineForm::new(coeffs.to_vec(), constant)
}

fn un_psi(n: usize, b: f64) -> ComplexPotential {
    let mut terms: Vec<LogTerm> = (0..n).map(|i| LogTerm::new(1.0, AffineForm::coordinate(n, i))).collect();
    terms.push(LogTerm::new(-1.0, AffineForm::total(n, 0.0)));
    let w = 1.0 / n as f64;
    if b == 0.0 {
        terms.push(LogTerm::new(1.0, AffineForm::total(n, 0.0)));
    } else {
        terms.push(LogTerm::new(w, AffineForm::total(n, -b)));
        for j in 1..n {
            let ang = 2.0 * PI * j as f64 / n as f64;
            if 2 * j == n {
                terms.push(LogTerm::new(w, AffineForm::total(n, b)));
            } else if 2 * j < n {
                terms.push(LogTerm::pair(w, AffineForm::total(n, -b * ang.cos()), -b * ang.sin()));
            }
        }
    }
    ComplexPotential::new(n, terms, None)
}

fn p1p1_psi(a1: f64, a2: f64) -> Result<ComplexPotential> {
    let a = [a1, a2];
    let mut terms = Vec::new();
    let y = [0.0, 0.0, 1.0];
    if a1 == 0.0 && a2 == 0.0 {
        for j in 0..2 {
            let mut c = y;
            c[j] -= 1.0;
            terms.push(LogTerm::new(1.0, form(&c, 0.0)));
            terms.push(LogTerm::new(1.0, AffineForm::coordinate(3, j)));
        }
        terms.push(LogTerm::new(-0.5, form(&y, 0.0)));
        return Ok(ComplexPotential::new(3, terms, None));
    }
    for j in 0..2 {
        let mut c = y;
        c[j] -= 1.0;
        terms.push(LogTerm::new(1.0, form(&c, 0.0)));
        terms.push(LogTerm::new(1.0, form(&AffineForm::coordinate(3, j).coeffs, a[j])));
        terms.push(LogTerm::new(-1.0, form(&y, a[j])));
    }
    terms.push(LogTerm::new(0.5, form(&y, 0.0)));
    let beta = super::beta_roots(a1, a2)?;
    if beta[0].q != 0.0 {
        terms.push(LogTerm::pair(0.5, form(&y, -beta[0].p), -beta[0].q));
    } else {
        for b in beta {
            terms.push(LogTerm::new(0.5, form(&y, -b.p)));
        }
    }
    Ok(ComplexPotential::new(3, terms, None))
}

/// `ψ` in closed form, in the moment coordinates of [`AnsatzFamily::moment`].
pub fn family_psi(f: &AnsatzFamily) -> Result<ComplexPotential> {
    let one = |c: &[f64], k: f64| LogTerm::new(1.0, form(c, k));
    Ok(match f.kind {
        FamilyKind::UnRf { n, b } => un_psi(n, b),
        FamilyKind::QuotientOn { n, b } => un_psi(n, b).pullback(&quotient_matrix(n).0),
        FamilyKind::Eh { a, c1, c2 } => {
            let s = c2.sqrt();
            let terms = vec![
                one(&[-1.0, 1.0], 0.0),
                one(&[1.0, 0.0], a),
                LogTerm::new(-1.0, form(&[0.0, 1.0], a)),
                LogTerm::new(0.5, form(&[0.0, 1.0], a - s)),
                LogTerm::new(0.5, form(&[0.0, 1.0], a + s)),
            ];
            ComplexPotential::new(2, terms, None).with_linear(vec![0.0, -0.5 * c1.ln()])
        }
        FamilyKind::Resolved3 { a } => {
            let terms = vec![
                one(&[-1.0, 1.0, 1.0], 0.0),
                one(&[1.0, 0.0, 0.0], a),
                one(&[0.0, 1.0, 0.0], 0.0),
                one(&[0.0, 0.0, 1.0], 0.0),
                LogTerm::new(-1.0, form(&[0.0, 1.0, 1.0], a)),
                LogTerm::new(0.5, form(&[0.0, 1.0, 1.0], 1.5 * a)),
            ];
            ComplexPotential::new(3, terms, None)
        }
        FamilyKind::KeplerK3Lift | FamilyKind::KrfK3 => {
            let mut terms = vec![
                one(&[-1.0, 1.0, 1.0], 0.0),
                one(&[1.0, 0.0, 0.0], 0.0),
                one(&[0.0, 1.0, 0.0], 0.0),
                one(&[0.0, 0.0, 1.0], 0.0),
            ];
            if f.kind == FamilyKind::KrfK3 {
                terms.push(LogTerm::new(-0.5, form(&[0.0, 1.0, 1.0], 0.0)));
            }
            ComplexPotential::new(3, terms, None)
        }
        FamilyKind::P1p1 { a1, a2 } => p1p1_psi(a1, a2)?,
        FamilyKind::O22 { a1, a2 } => p1p1_psi(a1, a2)?.pullback(&o22_matrix().0),
    })
}

/// `φ(u(y)) − Σ_g a_g ln(r_g²/(1 + r_g²))` with `r_g²/(1+r_g²) = (y_g + a_g)/(y + a_g)`,
/// the expected value of `ψ^∨` at the moment point `y`.
pub fn dual_potential_expected(f: &AnsatzFamily, y: &[f64]) -> Result<f64> {
    let total: f64 = f.chart.fiber.iter().map(|&k| y[k]).sum::<f64>() / f.chart.exponent;
    let mut v = f.profile.kahler_potential(total)?;
    for g in &f.chart.bases {
        if g.coeff != 0.0 {
            let part: f64 = g.indices.iter().map(|&k| y[k] + g.coeff).sum();
            v -= g.coeff * (part / (total + g.coeff)).ln();
        }
    }
    Ok(v)
}
