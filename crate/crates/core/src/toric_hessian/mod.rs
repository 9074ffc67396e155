//! U(n)-symmetric Kähler metrics `i∂∂̄φ(|z|²)` on Cⁿ∖{0} in symplectic
//! (action-angle) coordinates.
//!
//! The torus `Tⁿ` acts diagonally with moment map `yᵢ = |zᵢ|²φ′(u)`,
//! `u = |z|²`, and `y = Σyᵢ = uφ′(u)`. The metric is
//! `g = Σ(½G_ij dyᵢdyⱼ + 2G^{ij}dθᵢdθⱼ)` with `G = Hess ψ` for the complex
//! potential `ψ = Σyᵢ(ln yᵢ − 1) − y(ln y − 1) + ∫ln u dy`.
//!
//! Real metrics here use `g = 2Re(X·H·Ȳ)` for `ω = iΣH_{ab̄}dz_a∧dz̄_b`.

mod hessian;
mod potential;
mod profile;

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

pub use hessian::{hessian_kahler, syz_dual, HessianKahler, SyzDual};
pub use potential::{
    evaluate, legendre_dual, AffineForm, ComplexPotential, DualEval, HessianPotential, LegendreDual, LogTerm,
    PotentialEval,
};
pub use profile::{csc_profile, einstein_profile, BProfile, DPoly, KahlerPotential, QuadratureProfile, UProfile};

use crate::error::{GeomError, Result};
use crate::metrics::RadialProfile;
use crate::numkit::{cnorm_sqr, fd_ddbar, fd_hessian, mat_det, mat_inverse, CMatrix, RMatrix, C64};

/// `ψ` for a profile, as a [`ComplexPotential`].
pub fn un_potential(p: Arc<dyn UProfile>) -> ComplexPotential {
    let n = p.n();
    let mut terms: Vec<LogTerm> = (0..n).map(|i| LogTerm::new(1.0, AffineForm::coordinate(n, i))).collect();
    terms.push(LogTerm::new(-1.0, AffineForm::total(n, 0.0)));
    ComplexPotential::new(n, terms, Some((AffineForm::total(n, 0.0), p)))
}

/// `yᵢ = |zᵢ|²φ′(u)`.
pub fn moment_map(phi: &dyn RadialProfile, z: &[C64]) -> Result<Vec<f64>> {
    let u = cnorm_sqr(z);
    let d = phi.d1(u)?;
    if !(d > 0.0) {
        return Err(GeomError::NotPositive { eigenvalue: d });
    }
    Ok(z.iter().map(|w| w.norm_sqr() * d).collect())
}

/// `φ = y ln u − ∫ln u dy`.
pub fn kahler_potential_in_y(p: &dyn UProfile, y: f64) -> Result<f64> {
    p.kahler_potential(y)
}

fn check_moment(p: &dyn UProfile, y: &[f64]) -> Result<f64> {
    if y.len() != p.n() {
        return Err(GeomError::Config(format!("expected {} moment coordinates, got {}", p.n(), y.len())));
    }
    if let Some(v) = y.iter().find(|v| !(**v > 0.0)) {
        return Err(GeomError::Boundary(format!("moment coordinate {v} ≤ 0")));
    }
    let total: f64 = y.iter().sum();
    p.check(total)?;
    Ok(total)
}

/// `G_ij = δ_ij/yᵢ − 1/y + u′/u` and `G^{ij} = yᵢδ_ij + (u/(y²u′) − 1/y)yᵢyⱼ`.
pub fn metric_g(p: &dyn UProfile, y: &[f64]) -> Result<(RMatrix, RMatrix)> {
    let total = check_moment(p, y)?;
    let l1 = p.dlog(total)?[0];
    let n = y.len();
    let lower = RMatrix::from_fn(n, |i, j| if i == j { 1.0 / y[i] } else { 0.0 } - 1.0 / total + l1);
    let k = 1.0 / (total * total * l1) - 1.0 / total;
    let upper = RMatrix::from_fn(n, |i, j| if i == j { y[i] } else { 0.0 } + k * y[i] * y[j]);
    Ok((lower, upper))
}

/// `ψ`, `∇ψ` (the dual coordinates `ln(yᵢu/y)`) and `Hess ψ`.
pub fn complex_potential(p: Arc<dyn UProfile>, y: &[f64]) -> Result<PotentialEval> {
    check_moment(p.as_ref(), y)?;
    evaluate(&un_potential(p), y)
}

/// The point `zᵢ = (yᵢu/y)^{1/2}e^{iθᵢ}` with moment coordinates `y`.
pub fn point_from_moment(p: &dyn UProfile, y: &[f64], theta: &[f64]) -> Result<Vec<C64>> {
    let total = check_moment(p, y)?;
    let u = p.ln_u(total)?.exp();
    Ok(y.iter().zip(theta).map(|(yi, t)| C64::from_polar((yi * u / total).sqrt(), *t)).collect())
}

/// `∂zᵢ/∂yⱼ` at the point of [`point_from_moment`]: column `j` is the tangent vector.
pub fn point_jacobian(p: &dyn UProfile, y: &[f64], theta: &[f64]) -> Result<Vec<Vec<C64>>> {
    let z = point_from_moment(p, y, theta)?;
    let total: f64 = y.iter().sum();
    let [u, u1, _, _] = p.u_jet(total)?;
    let n = y.len();
    Ok((0..n)
        .map(|j| {
            (0..n)
                .map(|i| {
                    let m = y[i] * u / total;
                    let dm = if i == j { u / total } else { 0.0 } + y[i] * (u1 / total - u / (total * total));
                    z[i] * (dm / (2.0 * m))
                })
                .collect()
        })
        .collect())
}

/// `H = φ′(u)·I + φ″(u)·z̄zᵀ` (entry `(a, b)` multiplies `dz_a∧dz̄_b`).
pub fn un_hermitian(p: &dyn UProfile, z: &[C64]) -> Result<CMatrix> {
    let u = cnorm_sqr(z);
    let y = p.y_of_u(u)?;
    let u1 = p.u_jet(y)?[1];
    let d1 = y / u;
    let d2 = (u / u1 - y) / (u * u);
    Ok(CMatrix::from_fn(z.len(), |a, b| {
        let diag = if a == b { d1 } else { 0.0 };
        C64::new(diag, 0.0) + z[a].conj() * z[b] * d2
    }))
}

/// `det H = y′(u)(y/u)^{n−1}` for a U(n)-invariant metric.
pub fn volume_coefficient(p: &dyn UProfile, u: f64) -> Result<f64> {
    let y = p.y_of_u(u)?;
    let u1 = p.u_jet(y)?[1];
    Ok((1.0 / u1) * (y / u).powi(p.n() as i32 - 1))
}

/// `ω(X, Y) = −2 Im(X·H·Ȳ)` for `ω = iΣH_{ab̄}dz_a∧dz̄_b`.
pub fn two_form(h: &CMatrix, x: &[C64], y: &[C64]) -> f64 {
    let ybar: Vec<C64> = y.iter().map(|v| v.conj()).collect();
    let hy = h.matvec(&ybar);
    -2.0 * x.iter().zip(&hy).map(|(a, b)| a * b).sum::<C64>().im
}

/// `g(X, Y) = 2Re(X·H·Ȳ)`.
pub fn sym_form(h: &CMatrix, x: &[C64], y: &[C64]) -> f64 {
    let ybar: Vec<C64> = y.iter().map(|v| v.conj()).collect();
    let hy = h.matvec(&ybar);
    2.0 * x.iter().zip(&hy).map(|(a, b)| a * b).sum::<C64>().re
}

/// Matrix `F(∂y_j, ∂θ_i)` of a (1,1)-form `F = iΣM_{ab̄}dz_a∧dz̄_b` in
/// symplectic coordinates.
pub fn symplectic_components(p: &dyn UProfile, m: &CMatrix, y: &[f64], theta: &[f64]) -> Result<RMatrix> {
    let z = point_from_moment(p, y, theta)?;
    let jac = point_jacobian(p, y, theta)?;
    let n = y.len();
    let dtheta = |i: usize| -> Vec<C64> {
        (0..n).map(|k| if k == i { z[k] * C64::new(0.0, 1.0) } else { C64::new(0.0, 0.0) }).collect()
    };
    Ok(RMatrix::from_fn(n, |i, j| two_form(m, &jac[j], &dtheta(i))))
}

/// The scalar field `F = uΦ′(u)/y` and its y-derivative, with
/// `Φ = log[y′(u)(y/u)^{n−1}]`:
/// `F = −uu″/(yu′²) + (n−1)u/(y²u′) − (n−1)/y` in terms of `u(y)`.
pub fn ricci_field(p: &dyn UProfile, total: f64) -> Result<(f64, f64)> {
    let [u, u1, u2, u3] = p.u_jet(total)?;
    let nm = p.n() as f64 - 1.0;
    let y = total;
    let f = -u * u2 / (y * u1 * u1) + nm * u / (y * y * u1) - nm / y;
    let t1 = -(u1 * u2 + u * u3) / (y * u1 * u1) + u * u2 / (y * y * u1 * u1) + 2.0 * u * u2 * u2 / (y * u1 * u1 * u1);
    let t2 = nm * (1.0 / (y * y) - 2.0 * u / (y * y * y * u1) - u * u2 / (y * y * u1 * u1));
    let t3 = nm / (y * y);
    Ok((f, t1 + t2 + t3))
}

/// Ricci form `ρ = −Σd(F·yᵢ)∧dθᵢ` in symplectic coordinates.
#[derive(Clone, Debug, Serialize)]
pub struct RicciSymplectic {
    /// `F = uΦ′/y`.
    pub coefficient: f64,
    /// `∂F/∂yⱼ` (the same for every `j`).
    pub gradient: Vec<f64>,
    /// `ρ(∂y_j, ∂θ_i) = −∂(F yᵢ)/∂yⱼ`.
    pub form: RMatrix,
}

pub fn ricci_symplectic(p: &dyn UProfile, y: &[f64]) -> Result<RicciSymplectic> {
    let total = check_moment(p, y)?;
    let (f, df) = ricci_field(p, total)?;
    let n = y.len();
    Ok(RicciSymplectic {
        coefficient: f,
        gradient: vec![df; n],
        form: RMatrix::from_fn(n, |i, j| -(if i == j { f } else { 0.0 } + y[i] * df)),
    })
}

/// Largest `|∂ₖM_ij − ∂ⱼM_ik|` for `M_ij = ρ(∂y_j, ∂θ_i)`, by central differences.
pub fn ricci_curl(p: &dyn UProfile, y: &[f64]) -> Result<f64> {
    let n = y.len();
    let h = 1e-4 * y.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut derivs = Vec::with_capacity(n);
    for k in 0..n {
        let mut yp = y.to_vec();
        let mut ym = y.to_vec();
        yp[k] += h;
        ym[k] -= h;
        let (a, b) = (ricci_symplectic(p, &yp)?.form, ricci_symplectic(p, &ym)?.form);
        derivs.push(a.sub(&b).scale(0.5 / h));
    }
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                worst = worst.max((derivs[k][(i, j)] - derivs[j][(i, k)]).abs());
            }
        }
    }
    Ok(worst)
}

/// `Ric = −∂∂̄ log det H` by finite differences of the analytic `det H`.
pub fn un_ricci_fd(p: &dyn UProfile, z: &[C64]) -> Result<CMatrix> {
    let u = cnorm_sqr(z);
    let y = p.y_of_u(u)?;
    let (lo, hi) = p.domain();
    // δy ≈ 4√u·h/u′ per stencil: keep it inside the interval and small
    // against the local y-scale, where the profile is stiff in u
    let scale = y.min((y - lo).min(hi - y));
    let h = (5e-4 * u.sqrt()).min(4e-3 * scale * p.u_jet(y)?[1] / u.sqrt());
    let logdet = |v: &[C64]| match un_hermitian(p, v) {
        Ok(m) => mat_det(&m).re.ln(),
        Err(_) => f64::NAN,
    };
    let ric = fd_ddbar(logdet, z, Some(h))?;
    if !ric.is_finite() {
        return Err(GeomError::Evaluation("log det H near the profile boundary".into()));
    }
    Ok(ric.scale(C64::new(-1.0, 0.0)))
}

/// Scalar curvature by three routes.
#[derive(Clone, Copy, Debug, Serialize)]
pub struct ScalarCurvature {
    /// The closed form in `u(y)` and its first three derivatives.
    pub closed: f64,
    /// `−Σ∂²G^{ij}/∂yᵢ∂yⱼ` by finite differences.
    pub abreu: f64,
    /// `ρ∧ω^{n−1} = Rωⁿ`, i.e. `(1/n)tr(H⁻¹Ric)`, with `Ric` from log det.
    pub logdet: f64,
}

/// `R = u″/u′ + (n−1)(n−2)/y + 2(n−1)uu″/(u′²y) − (n−2)(n−1)u/(y²u′)
///      + uu‴/u′² − 2uu″²/u′³`.
pub fn scalar_closed(p: &dyn UProfile, total: f64) -> Result<f64> {
    let [u, u1, u2, u3] = p.u_jet(total)?;
    let nf = p.n() as f64;
    let y = total;
    Ok(u2 / u1 + (nf - 1.0) * (nf - 2.0) / y + 2.0 * (nf - 1.0) * u * u2 / (u1 * u1 * y)
        - (nf - 2.0) * (nf - 1.0) * u / (y * y * u1)
        + u * u3 / (u1 * u1)
        - 2.0 * u * u2 * u2 / (u1 * u1 * u1))
}

/// `−Σ_{ij}∂²G^{ij}/∂yᵢ∂yⱼ` for any smooth matrix field `G^{ij}(y)`.
pub fn abreu_divergence(upper: impl Fn(&[f64]) -> Result<RMatrix>, y: &[f64], h: f64) -> Result<f64> {
    let n = y.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            let comp = |v: &[f64]| upper(v).map(|m| m[(i, j)]).unwrap_or(f64::NAN);
            acc += fd_hessian(comp, y, Some(h))?[(i, j)];
        }
    }
    if !acc.is_finite() {
        return Err(GeomError::Evaluation("Abreu divergence near the boundary".into()));
    }
    Ok(-acc)
}

pub fn scalar_abreu(p: &dyn UProfile, y: &[f64]) -> Result<f64> {
    let total = check_moment(p, y)?;
    let (lo, hi) = p.domain();
    let room = y.iter().cloned().fold((total - lo).min(hi - total), f64::min);
    let h = 1e-2 * room;
    abreu_divergence(|v| metric_g(p, v).map(|(_, up)| up), y, h)
}

/// `(1/n)Re tr(H⁻¹Ric)` at the point with moment coordinates `y` and angles `theta`.
pub fn scalar_logdet(p: &dyn UProfile, y: &[f64], theta: &[f64]) -> Result<f64> {
    let z = point_from_moment(p, y, theta)?;
    let h = un_hermitian(p, &z)?;
    let ric = un_ricci_fd(p, &z)?;
    let tr: C64 = (0..z.len()).map(|a| mat_inverse(&h).map(|hi| hi.matmul(&ric)[(a, a)])).sum::<Result<C64>>()?;
    Ok(tr.re / z.len() as f64)
}

pub fn scalar_curvature(p: &dyn UProfile, y: &[f64]) -> Result<ScalarCurvature> {
    let total = check_moment(p, y)?;
    let theta: Vec<f64> = (0..y.len()).map(|k| 0.3 + 0.7 * k as f64).collect();
    Ok(ScalarCurvature {
        closed: scalar_closed(p, total)?,
        abreu: scalar_abreu(p, y)?,
        logdet: scalar_logdet(p, y, &theta)?,
    })
}

/// Largest deviation of `∂zᵢ/∂yⱼ / zᵢ` from `½G_ij`: the statement that
/// `½ΣG_ij dyⱼ + i dθᵢ = dzᵢ/zᵢ`.
pub fn one_zero_form_defect(p: &dyn UProfile, y: &[f64], theta: &[f64]) -> Result<f64> {
    let z = point_from_moment(p, y, theta)?;
    let (g, _) = metric_g(p, y)?;
    let n = y.len();
    let mut worst = 0.0f64;
    for j in 0..n {
        let step = 1e-5 * y[j];
        let mut yp = y.to_vec();
        let mut ym = y.to_vec();
        yp[j] += step;
        ym[j] -= step;
        let (zp, zm) = (point_from_moment(p, &yp, theta)?, point_from_moment(p, &ym, theta)?);
        for i in 0..n {
            let d = (zp[i] - zm[i]) / (2.0 * step) / z[i];
            worst = worst.max((d - C64::new(0.5 * g[(i, j)], 0.0)).norm());
        }
    }
    Ok(worst)
}

/// A moment point with total `y` drawn uniformly from the profile
/// interval (clipped to `[lo + margin, cap]`) and random positive split.
pub fn sample_moment_point(p: &dyn UProfile, cap: f64, rng: &mut impl Rng) -> Vec<f64> {
    let (lo, hi) = p.domain();
    let top = hi.min(cap);
    let margin = 1e-2 * (top - lo);
    let total = rng.gen_range(lo + margin..top - margin);
    let w: Vec<f64> = (0..p.n()).map(|_| rng.gen_range(0.2..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|v| total * v / s).collect()
}
