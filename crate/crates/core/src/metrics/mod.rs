//! Kähler metrics on the Kepler manifold and on (deformed) conifolds.
//!
//! Points of `{Σ_{j=0}^n w_j² = a}` are handled in the chart `w₁..w_n`, with
//! `w₀` eliminated. Everything is expressed through
//! `t = Σ_{j=0}^n |w_j|² = |a − Σ₁ⁿw_j²| + Σ₁ⁿ|w_j|²`, which does not depend
//! on the branch of `w₀`.
//!
//! Hermitian matrices `H` are the coefficients of `ω = iΣH_{jk̄}dw_j∧dw̄_k`;
//! the real metric is `g(X, Y) = 2Re(Xᵀ H Ȳ)` on chart vectors.

mod profile;
mod sasaki;

pub use profile::{ricci_flat_ode_residual, ConifoldProfile, DeformedProfile, PowerProfile, RadialProfile};
pub use sasaki::{
    intrinsic_sasaki, moser_inverse, moser_inverse_differential, moser_pullback_sasaki, sasaki_general, sasaki_sphere,
    sasaki_sphere_printed, sasaki_sphere_variant, HdVariant, SpherePair,
};

use serde::Serialize;

use crate::error::{GeomError, Result};
use crate::numkit::{
    cnorm_sqr, dot, fd_ddbar, hermitian_eigenvalues, mat_det, mat_inverse, norm, CMatrix, RMatrix, C64,
};
use crate::regularization::{moser_forward, FlatCotangentPoint};
use crate::structures::{kepler_to_conifold, levi_civita_map, ConifoldPoint};

pub type HermitianForm = CMatrix;

/// `t` and its first and mixed second derivatives in the chart.
#[derive(Clone, Debug)]
pub struct TJet {
    pub t: f64,
    /// `|w₀|² = |a − Σw_j²|`
    pub w0_sqr: f64,
    /// `∂t/∂w_j`
    pub dt: Vec<C64>,
    /// `∂²t/∂w_j∂w̄_k = δ_jk + w_j w̄_k/|w₀|²`
    pub ddt: CMatrix,
}

fn chart_sum(coords: &[C64]) -> C64 {
    coords.iter().map(|z| z * z).sum()
}

/// Finite-difference step for chart functions: the `|w₀|²` term is not
/// smooth across `w₀ = 0`, so the stencil must stay well inside that distance.
pub fn chart_fd_step(coords: &[C64], a: C64) -> f64 {
    let scale = 1.0 + cnorm_sqr(coords).sqrt();
    let dist = (a - chart_sum(coords)).norm() / (2.0 * cnorm_sqr(coords).sqrt() + 1e-300);
    (1e-3 * scale).min(1e-2 * dist)
}

/// `t` as a function of the chart coordinates.
pub fn quadric_t(coords: &[C64], a: C64) -> f64 {
    (a - chart_sum(coords)).norm() + cnorm_sqr(coords)
}

pub fn quadric_t_jet(coords: &[C64], a: C64) -> Result<TJet> {
    let w0sq = a - chart_sum(coords);
    let m = w0sq.norm();
    let scale = 1.0 + cnorm_sqr(coords);
    if m <= 1e-14 * scale {
        return Err(GeomError::Chart("w₀ = 0, the chart w₁..w_n degenerates".into()));
    }
    let ph = w0sq.conj() / m;
    let dt = coords.iter().map(|w| w.conj() - w * ph).collect();
    let n = coords.len();
    let ddt = CMatrix::from_fn(n, |j, k| {
        let d = if j == k { 1.0 } else { 0.0 };
        C64::new(d, 0.0) + coords[j] * coords[k].conj() / m
    });
    Ok(TJet { t: m + cnorm_sqr(coords), w0_sqr: m, dt, ddt })
}

/// Chart coordinates `w₁..w_n` of a quadric point.
pub fn chart_coords(pt: &ConifoldPoint) -> Result<Vec<C64>> {
    if pt.w.len() < 3 {
        return Err(GeomError::Domain("need at least w₀, w₁, w₂".into()));
    }
    if pt.w[0].norm() <= 1e-7 * (1.0 + cnorm_sqr(&pt.w)).sqrt() {
        return Err(GeomError::Chart("w₀ = 0, the chart w₁..w_n degenerates".into()));
    }
    Ok(pt.w[1..].to_vec())
}

/// `f′∂∂̄t + f″∂t∂̄t` at chart coordinates, without a positivity check.
pub fn profile_hermitian_at(profile: &dyn RadialProfile, coords: &[C64], a: C64) -> Result<HermitianForm> {
    let j = quadric_t_jet(coords, a)?;
    let f1 = profile.d1(j.t)?;
    let f2 = profile.d2(j.t)?;
    let n = coords.len();
    Ok(CMatrix::from_fn(n, |r, c| j.ddt[(r, c)] * f1 + j.dt[r] * j.dt[c].conj() * f2))
}

fn check_positive(h: HermitianForm) -> Result<HermitianForm> {
    let ev = hermitian_eigenvalues(&h);
    match ev.first() {
        Some(&e) if e > 0.0 => Ok(h),
        Some(&e) => Err(GeomError::NotPositive { eigenvalue: e }),
        None => Err(GeomError::Domain("empty chart".into())),
    }
}

/// Chart matrix of `i∂∂̄f(t)` on the (deformed) conifold.
pub fn metric_from_profile(profile: &dyn RadialProfile, pt: &ConifoldPoint) -> Result<HermitianForm> {
    check_positive(profile_hermitian_at(profile, &chart_coords(pt)?, pt.a)?)
}

/// `(t f′ⁿ + (t² − |a|²) f′^{n−1} f″)/|w₀|²`.
pub fn profile_det_closed_form(profile: &dyn RadialProfile, pt: &ConifoldPoint) -> Result<f64> {
    let coords = chart_coords(pt)?;
    let j = quadric_t_jet(&coords, pt.a)?;
    let n = coords.len() as i32;
    let (f1, f2) = (profile.d1(j.t)?, profile.d2(j.t)?);
    let a2 = pt.a.norm_sqr();
    Ok((j.t * f1.powi(n) + (j.t * j.t - a2) * f1.powi(n - 1) * f2) / j.w0_sqr)
}

/// `det(δ + w w̄ᵀ + x z z̄ᵀ) = (1 + |w|²)(1 + x|z|²) − x|Σ z_j w̄_j|²`.
pub fn rank_two_det(w: &[C64], z: &[C64], x: f64) -> f64 {
    let zw: C64 = z.iter().zip(w).map(|(a, b)| a * b.conj()).sum();
    (1.0 + cnorm_sqr(w)) * (1.0 + x * cnorm_sqr(z)) - x * zw.norm_sqr()
}

/// `√2·|w⃗|`, the Kepler potential, in chart coordinates (`a = 0`).
pub fn kepler_potential(coords: &[C64]) -> f64 {
    std::f64::consts::SQRT_2 * quadric_t(coords, C64::new(0.0, 0.0)).sqrt()
}

fn require_cone(pt: &ConifoldPoint) -> Result<()> {
    if pt.a != C64::new(0.0, 0.0) {
        return Err(GeomError::Domain("the Kepler metric lives on the cone a = 0".into()));
    }
    Ok(())
}

/// Chart matrix of `ω = 2i∂∂̄(|w⃗|/√2)`.
pub fn kepler_hermitian(pt: &ConifoldPoint) -> Result<HermitianForm> {
    require_cone(pt)?;
    metric_from_profile(&PowerProfile::kepler(), pt)
}

/// Finite-difference `∂∂̄` of [`kepler_potential`].
pub fn kepler_hermitian_fd(pt: &ConifoldPoint) -> Result<HermitianForm> {
    require_cone(pt)?;
    let z = chart_coords(pt)?;
    fd_ddbar(kepler_potential, &z, Some(chart_fd_step(&z, pt.a)))
}

/// `(√2/2)ⁿ / (2|Σw_j²|·(|Σw_j²| + Σ|w_j|²)^{(n−2)/2})`.
pub fn kepler_det_closed_form(pt: &ConifoldPoint) -> Result<f64> {
    let coords = chart_coords(pt)?;
    let n = coords.len() as f64;
    let s = chart_sum(&coords).norm();
    let x = s + cnorm_sqr(&coords);
    Ok((0.5 * std::f64::consts::SQRT_2).powf(n) / (2.0 * s * x.powf(0.5 * (n - 2.0))))
}

/// `−∂∂̄ log det H` by finite differences of the analytic log-determinant.
pub fn ricci_from_log_det(
    hermitian: impl Fn(&[C64]) -> Result<HermitianForm>,
    coords: &[C64],
    h: Option<f64>,
) -> Result<HermitianForm> {
    let logdet = |z: &[C64]| match hermitian(z) {
        Ok(m) => mat_det(&m).re.ln(),
        Err(_) => f64::NAN,
    };
    Ok(fd_ddbar(logdet, coords, h)?.scale(C64::new(-1.0, 0.0)))
}

/// Ricci matrix of the Kepler metric.
pub fn kepler_ricci(pt: &ConifoldPoint) -> Result<HermitianForm> {
    require_cone(pt)?;
    let p = PowerProfile::kepler();
    let a = C64::new(0.0, 0.0);
    let z = chart_coords(pt)?;
    ricci_from_log_det(|v| profile_hermitian_at(&p, v, a), &z, Some(chart_fd_step(&z, a)))
}

/// Ricci matrix of `i∂∂̄f(t)` on the (deformed) conifold.
pub fn profile_ricci(profile: &dyn RadialProfile, pt: &ConifoldPoint) -> Result<HermitianForm> {
    let z = chart_coords(pt)?;
    ricci_from_log_det(|v| profile_hermitian_at(profile, v, pt.a), &z, Some(chart_fd_step(&z, pt.a)))
}

/// `∂∂̄ log t = ∂∂̄t/t − ∂t∂̄t/t²`, in closed form.
pub fn log_t_ddbar(coords: &[C64], a: C64) -> Result<HermitianForm> {
    let j = quadric_t_jet(coords, a)?;
    let n = coords.len();
    Ok(CMatrix::from_fn(n, |r, c| j.ddt[(r, c)] / j.t - j.dt[r] * j.dt[c].conj() / (j.t * j.t)))
}

/// The coefficient κ in `ρ = κ·∂∂̄ log(|Σw²| + Σ|w|²)` as displayed: `−(n−2)/2`.
pub fn kepler_ricci_printed_coefficient(n: usize) -> f64 {
    -0.5 * (n as f64 - 2.0)
}

/// The coefficient obtained from `det H ∝ 1/(|Σw²|·t^{(n−2)/2})` with
/// `log|Σw²|` pluriharmonic: `+(n−2)/2`.
pub fn kepler_ricci_coefficient(n: usize) -> f64 {
    0.5 * (n as f64 - 2.0)
}

/// `κ·∂∂̄ log t` for a given coefficient κ.
pub fn kepler_ricci_closed_form(pt: &ConifoldPoint, kappa: f64) -> Result<HermitianForm> {
    require_cone(pt)?;
    Ok(log_t_ddbar(&chart_coords(pt)?, pt.a)?.scale(C64::new(kappa, 0.0)))
}

/// Ambient tangent vectors `δw ∈ C^{n+1}` of the chart directions
/// `∂/∂Re w_j`, `∂/∂Im w_j` (`j = 1..n`, interleaved).
pub fn chart_tangents(pt: &ConifoldPoint) -> Result<Vec<Vec<C64>>> {
    let coords = chart_coords(pt)?;
    let w0 = pt.w[0];
    let n = coords.len();
    let mut out = Vec::with_capacity(2 * n);
    for j in 0..n {
        for unit in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
            let mut v = vec![C64::new(0.0, 0.0); n + 1];
            v[j + 1] = unit;
            v[0] = -coords[j] * unit / w0;
            out.push(v);
        }
    }
    Ok(out)
}

/// Real `2n×2n` metric `2Re(ζ_aᵀ H ζ̄_b)` in the chart basis of [`chart_tangents`].
pub fn real_metric(h: &HermitianForm) -> RMatrix {
    let n = h.dim();
    let unit = |a: usize| {
        let mut v = vec![C64::new(0.0, 0.0); n];
        v[a / 2] = if a.is_multiple_of(2) { C64::new(1.0, 0.0) } else { C64::new(0.0, 1.0) };
        v
    };
    RMatrix::from_fn(2 * n, |a, b| {
        let (za, zb) = (unit(a), unit(b));
        let hz: Vec<C64> = h.matvec(&zb.iter().map(|z| z.conj()).collect::<Vec<_>>());
        2.0 * za.iter().zip(&hz).map(|(x, y)| x * y).sum::<C64>().re
    })
}

/// Least-squares coefficients `c` minimising `‖target − Σc_k basis_k‖_F`,
/// and the Frobenius norm of the remaining residual.
pub fn fit_coefficients(target: &RMatrix, basis: &[RMatrix]) -> Result<(Vec<f64>, f64)> {
    let m = basis.len();
    // unit-norm columns keep the Gram matrix well scaled when the basis
    // terms differ by powers of r
    let norms: Vec<f64> = basis.iter().map(|b| b.frobenius().max(f64::MIN_POSITIVE)).collect();
    let gram = RMatrix::from_fn(m, |i, j| dot(basis[i].entries(), basis[j].entries()) / (norms[i] * norms[j]));
    let rhs: Vec<f64> = basis.iter().zip(&norms).map(|(b, n)| dot(b.entries(), target.entries()) / n).collect();
    let coef: Vec<f64> = mat_inverse(&gram)?.matvec(&rhs).iter().zip(&norms).map(|(c, n)| c / n).collect();
    let mut fit = RMatrix::zeros(target.dim());
    for (c, b) in coef.iter().zip(basis) {
        fit = fit.add(&b.scale(*c));
    }
    Ok((coef, target.sub(&fit).frobenius()))
}

/// Radial/angular decomposition of the Kepler metric at a cone point.
#[derive(Clone, Debug, Serialize)]
pub struct ConeSplit {
    /// `u = |Re w|`
    pub u: f64,
    /// `r = (√2·u)^{1/2}`
    pub r: f64,
    /// Kepler metric in the real chart basis.
    pub metric: RMatrix,
    /// `dr` on the chart basis.
    pub dr: Vec<f64>,
    /// Sasaki form on the sphere-bundle part, pulled back to the chart basis.
    pub h: RMatrix,
    /// `‖g − (1/√2)(dr² + r²h)‖_F`
    pub residual: f64,
}

impl ConeSplit {
    pub fn radial_part(&self) -> RMatrix {
        let d = &self.dr;
        RMatrix::from_fn(d.len(), |a, b| d[a] * d[b])
    }

    pub fn angular_part(&self) -> RMatrix {
        self.h.scale(self.r * self.r)
    }

    /// Fitted `(α, β)` in `g ≈ α·dr² + β·r²h` and the remaining residual.
    pub fn fit(&self) -> Result<([f64; 2], f64)> {
        let (c, res) = fit_coefficients(&self.metric, &[self.radial_part(), self.angular_part()])?;
        Ok(([c[0], c[1]], res))
    }

    /// `‖g − α·dr² − β·r²h‖_F` for given constants.
    pub fn residual_with(&self, alpha: f64, beta: f64) -> f64 {
        self.metric.sub(&self.radial_part().scale(alpha)).sub(&self.angular_part().scale(beta)).frobenius()
    }
}

/// Split the Kepler metric as `(1/√2)(dr² + r²h)` with `h` the sphere-bundle
/// Sasaki form read in stereographic coordinates of `(û, v̂)`.
pub fn kepler_cone_split(pt: &ConifoldPoint, variant: HdVariant) -> Result<ConeSplit> {
    let metric = real_metric(&kepler_hermitian(pt)?);
    let re: Vec<f64> = pt.w.iter().map(|z| z.re).collect();
    let im: Vec<f64> = pt.w.iter().map(|z| z.im).collect();
    let u = norm(&re);
    let v = norm(&im);
    let uh: Vec<f64> = re.iter().map(|c| c / u).collect();
    let vh: Vec<f64> = im.iter().map(|c| c / v).collect();
    let r = (std::f64::consts::SQRT_2 * u).sqrt();
    let base = crate::regularization::KeplerPoint { x: uh.clone(), xi: vh.clone() };
    let flat = moser_inverse(&base)?;
    let form = sasaki_sphere_variant(&flat.y, &flat.eta, variant);
    let tangents = chart_tangents(pt)?;
    let mut dr = Vec::with_capacity(tangents.len());
    let mut lifts: Vec<Vec<f64>> = Vec::with_capacity(tangents.len());
    for dw in &tangents {
        let dre: Vec<f64> = dw.iter().map(|z| z.re).collect();
        let dim: Vec<f64> = dw.iter().map(|z| z.im).collect();
        let du = dot(&uh, &dre);
        let dv = dot(&vh, &dim);
        let duh: Vec<f64> = dre.iter().zip(&uh).map(|(d, e)| (d - e * du) / u).collect();
        let dvh: Vec<f64> = dim.iter().zip(&vh).map(|(d, e)| (d - e * dv) / v).collect();
        // r² = √2·u
        dr.push(std::f64::consts::SQRT_2 * du / (2.0 * r));
        let (dy, deta) = moser_inverse_differential(&base, &duh, &dvh)?;
        lifts.push(dy.into_iter().chain(deta).collect());
    }
    let m = tangents.len();
    let h = RMatrix::from_fn(m, |a, b| {
        let fb = form.matvec(&lifts[b]);
        dot(&lifts[a], &fb)
    });
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    let mut split = ConeSplit { u, r, metric, dr, h, residual: 0.0 };
    split.residual = split.residual_with(inv, inv);
    Ok(split)
}

/// Outcome of comparing `i∂∂̄(C t^{(n−1)/n})` with
/// `dr² + r²(Σ(dû² + dv̂²) − (2/n)(Σû dv̂)²)`.
#[derive(Clone, Debug, Serialize)]
pub struct SasakiEinsteinCheck {
    /// max entrywise deviation from the displayed cone form
    pub residual: f64,
    /// fitted coefficients of `dr²`, `r²Σ(dû² + dv̂²)`, `r²(Σû dv̂)²`
    pub fitted: [f64; 3],
    /// max Frobenius residual after fitting
    pub fit_residual: f64,
}

/// `r = √(2n/(n−1))·t^{(n−1)/(2n)}`.
pub fn sasaki_einstein_radius(n: usize, t: f64) -> f64 {
    let nf = n as f64;
    (2.0 * nf / (nf - 1.0)).sqrt() * t.powf((nf - 1.0) / (2.0 * nf))
}

pub fn sasaki_einstein_residual(n: usize, samples: &[(SpherePair, f64)]) -> Result<SasakiEinsteinCheck> {
    if n < 2 {
        return Err(GeomError::Config("n ≥ 2 required".into()));
    }
    let profile = PowerProfile::sasaki_einstein(n);
    let nf = n as f64;
    let mut residual: f64 = 0.0;
    let mut fit_residual: f64 = 0.0;
    let mut fitted = [0.0; 3];
    for (pair, t) in samples {
        if pair.u_hat.len() != n + 1 {
            return Err(GeomError::Domain(format!("sphere pair must live in R^{}", n + 1)));
        }
        let pt = pair.cone_point(*t);
        let g = real_metric(&metric_from_profile(&profile, &pt)?);
        let r = sasaki_einstein_radius(n, *t);
        let tangents = chart_tangents(&pt)?;
        let u = (0.5 * t).sqrt();
        let mut dr = Vec::new();
        let mut dd = Vec::new();
        let mut dvs = Vec::new();
        for dw in &tangents {
            let dre: Vec<f64> = dw.iter().map(|z| z.re).collect();
            let dim: Vec<f64> = dw.iter().map(|z| z.im).collect();
            let wre: Vec<f64> = pt.w.iter().map(|z| z.re).collect();
            let wim: Vec<f64> = pt.w.iter().map(|z| z.im).collect();
            let dt = 2.0 * (dot(&wre, &dre) + dot(&wim, &dim));
            dr.push(r * (nf - 1.0) / (2.0 * nf) * dt / t);
            let du = dot(&pair.u_hat, &dre);
            let dv = dot(&pair.v_hat, &dim);
            let duh: Vec<f64> = dre.iter().zip(&pair.u_hat).map(|(d, e)| (d - e * du) / u).collect();
            let dvh: Vec<f64> = dim.iter().zip(&pair.v_hat).map(|(d, e)| (d - e * dv) / u).collect();
            dd.push((duh, dvh.clone()));
            dvs.push(dot(&pair.u_hat, &dvh));
        }
        let m = tangents.len();
        let radial = RMatrix::from_fn(m, |a, b| dr[a] * dr[b]);
        let round = RMatrix::from_fn(m, |a, b| r * r * (dot(&dd[a].0, &dd[b].0) + dot(&dd[a].1, &dd[b].1)));
        let contact = RMatrix::from_fn(m, |a, b| r * r * dvs[a] * dvs[b]);
        let displayed = radial.add(&round).add(&contact.scale(-2.0 / nf));
        residual = residual.max(g.sub(&displayed).max_abs());
        let (c, res) = fit_coefficients(&g, &[radial, round, contact])?;
        fitted = [c[0], c[1], c[2]];
        fit_residual = fit_residual.max(res);
    }
    Ok(SasakiEinsteinCheck { residual, fitted, fit_residual })
}

/// The K₂ Kepler potential `√2|w⃗|` at the image of `(ξ, η, ω, χ)` under the
/// Levi-Civita map followed by the Moser map with `y = (p, q)`, `η = (x, y)`.
pub fn k2_lc_potential(v: &[f64]) -> Result<f64> {
    let s = levi_civita_map(v)?;
    let kp = moser_forward(&FlatCotangentPoint { y: vec![s.p, s.q], eta: vec![s.x, s.y] }).point;
    let w = kepler_to_conifold(&kp).w;
    Ok(std::f64::consts::SQRT_2 * cnorm_sqr(&w).sqrt())
}

#[cfg(test)]
mod tests;
