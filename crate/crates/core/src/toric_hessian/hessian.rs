//! Hessian-Kähler metrics `ω = Hess ψ^∨` on `Rⁿ × Tⁿ`, and the SYZ dual
//! metric built from `Hess ψ` on the moment side.

use serde::Serialize;

use super::potential::{HessianPotential, LegendreDual};
use crate::error::{GeomError, Result};
use crate::numkit::{fd_ddbar, fd_hessian, mat_det, mat_inverse, CMatrix, RMatrix, C64};

#[derive(Clone, Debug, Serialize)]
pub struct HessianKahler {
    /// Primal point `y = ∇ψ^∨(x)`.
    pub primal: Vec<f64>,
    /// `G^{ij} = ∂²ψ^∨/∂xᵢ∂xⱼ`, the Kähler form in `(x, θ)`.
    pub omega: RMatrix,
    /// `ρ_ij = −∂²log det G^{ij}/∂xᵢ∂xⱼ`.
    pub rho: RMatrix,
    /// `ΣG_ij ρ_ij`.
    pub scalar: f64,
}

/// Kähler data of `ψ^∨ = Legendre(ψ)` at the dual point `x`; `start` seeds
/// the Newton solve for `y(x)`.
pub fn hessian_kahler(psi: &dyn HessianPotential, x: &[f64], start: &[f64]) -> Result<HessianKahler> {
    let dual = LegendreDual::new(psi, start.to_vec());
    let y = dual.solve(x)?;
    let g = psi.hessian(&y)?;
    let omega = mat_inverse(&g)?;
    let logdet =
        |v: &[f64]| dual.solve(v).and_then(|yv| psi.hessian(&yv)).map(|m| mat_det(&m).ln()).unwrap_or(f64::NAN);
    let rho = fd_hessian(logdet, x, None)?;
    if !rho.is_finite() {
        return Err(GeomError::Evaluation("Hessian-Kähler Ricci near the boundary".into()));
    }
    let n = x.len();
    let scalar = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| g[(i, j)] * rho[(i, j)]).sum();
    Ok(HessianKahler { primal: y, omega, rho, scalar })
}

#[derive(Clone, Debug, Serialize)]
pub struct SyzDual {
    /// `G_ij(dyᵢdyⱼ + dθ^∨ᵢdθ^∨ⱼ)` as a `2n × 2n` block matrix.
    pub metric: RMatrix,
    /// `−∂∂̄ log det G` in `w = y + iθ^∨`.
    pub ricci: CMatrix,
}

pub fn syz_dual(psi: &dyn HessianPotential, y: &[f64]) -> Result<SyzDual> {
    let g = psi.hessian(y)?;
    let n = y.len();
    let metric = RMatrix::from_fn(2 * n, |a, b| if a / n == b / n { g[(a % n, b % n)] } else { 0.0 });
    let w: Vec<C64> = y.iter().map(|v| C64::new(*v, 0.0)).collect();
    let logdet = |v: &[C64]| {
        let re: Vec<f64> = v.iter().map(|c| c.re).collect();
        psi.hessian(&re).map(|m| mat_det(&m).ln()).unwrap_or(f64::NAN)
    };
    let h = 1e-3 * y.iter().fold(f64::INFINITY, |m, v| m.min(v.abs().max(1e-3)));
    let ricci = fd_ddbar(logdet, &w, Some(h))?.scale(C64::new(-1.0, 0.0));
    if !ricci.is_finite() {
        return Err(GeomError::Evaluation("SYZ dual Ricci near the boundary".into()));
    }
    Ok(SyzDual { metric, ricci })
}
