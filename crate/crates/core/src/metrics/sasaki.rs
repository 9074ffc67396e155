//! Sasaki-type metrics on (co)tangent bundles of the round sphere, in
//! stereographic coordinates `(y, η)` and intrinsically in R^{n+1}.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::numkit::{dot, fd_jacobian, norm, RMatrix, C64};
use crate::regularization::{moser_forward, FlatCotangentPoint, KeplerPoint};
use crate::structures::ConifoldPoint;

/// Orthonormal pair `(û, v̂)` in R^{n+1}: a point of the unit sphere bundle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpherePair {
    pub u_hat: Vec<f64>,
    pub v_hat: Vec<f64>,
}

impl SpherePair {
    pub fn new(u_hat: Vec<f64>, v_hat: Vec<f64>) -> Result<Self> {
        if u_hat.len() != v_hat.len() || u_hat.len() < 2 {
            return Err(GeomError::Domain("sphere pair needs equal lengths ≥ 2".into()));
        }
        let defect =
            (dot(&u_hat, &u_hat) - 1.0).abs().max((dot(&v_hat, &v_hat) - 1.0).abs()).max(dot(&u_hat, &v_hat).abs());
        if defect > 1e-10 {
            return Err(GeomError::Domain(format!("not an orthonormal pair (defect {defect:e})")));
        }
        Ok(Self { u_hat, v_hat })
    }

    /// Random pair in R^{n+1}.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        loop {
            let mut u: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut v: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let nu = norm(&u);
            if nu < 1e-3 {
                continue;
            }
            u.iter_mut().for_each(|c| *c /= nu);
            let d = dot(&u, &v);
            v.iter_mut().zip(&u).for_each(|(a, b)| *a -= d * b);
            let nv = norm(&v);
            if nv < 1e-3 {
                continue;
            }
            v.iter_mut().for_each(|c| *c /= nv);
            return Self { u_hat: u, v_hat: v };
        }
    }

    /// The cone point `w = u(û + iv̂)` with `Σ|w|² = t`.
    pub fn cone_point(&self, t: f64) -> ConifoldPoint {
        let u = (0.5 * t).sqrt();
        let w = self.u_hat.iter().zip(&self.v_hat).map(|(a, b)| C64::new(u * a, u * b)).collect();
        ConifoldPoint { w, a: C64::new(0.0, 0.0) }
    }
}

/// Which coefficient multiplies `dy_j` on the diagonal of the connection term.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum HdVariant {
    /// `−(η·y)dy_j`, which is what the Moser pullback produces.
    Derived,
    /// `−(η·η)dy_j`, the displayed coefficient.
    AsPrinted,
}

fn sasaki_with(y: &[f64], eta: &[f64], diag: f64) -> RMatrix {
    let n = y.len();
    let d = 1.0 + dot(y, y);
    // rows of D: Dη_j as a covector on (dy, dη)
    let mut dm = vec![vec![0.0; 2 * n]; n];
    for j in 0..n {
        dm[j][n + j] = 1.0;
        for k in 0..n {
            dm[j][k] += 2.0 / d * (eta[j] * y[k] + eta[k] * y[j]);
        }
        dm[j][j] -= 2.0 / d * diag;
    }
    let base = 4.0 / (d * d);
    let fib = d * d / 4.0;
    RMatrix::from_fn(2 * n, |a, b| {
        let g = if a == b && a < n { base } else { 0.0 };
        g + fib * (0..n).map(|j| dm[j][a] * dm[j][b]).sum::<f64>()
    })
}

/// `4Σdy²/(1+|y|²)² + ((1+|y|²)²/4)ΣDη²` in the basis `(dy, dη)`,
/// connection term built with `(η·y)`.
pub fn sasaki_sphere(y: &[f64], eta: &[f64]) -> RMatrix {
    sasaki_with(y, eta, dot(eta, y))
}

/// Same, with the `−(η·η)dy_j` diagonal term as displayed.
pub fn sasaki_sphere_printed(y: &[f64], eta: &[f64]) -> RMatrix {
    sasaki_with(y, eta, dot(eta, eta))
}

pub fn sasaki_sphere_variant(y: &[f64], eta: &[f64], v: HdVariant) -> RMatrix {
    match v {
        HdVariant::Derived => sasaki_sphere(y, eta),
        HdVariant::AsPrinted => sasaki_sphere_printed(y, eta),
    }
}

/// Sasaki metric `g_jk dx^j dx^k + g^{kl}Dp_k Dp_l` for the stereographic
/// round metric `g = 4δ/(1+|x|²)²`, with its Christoffel symbols written out.
pub fn sasaki_general(x: &[f64], p: &[f64]) -> RMatrix {
    let n = x.len();
    let d = 1.0 + dot(x, x);
    let xp = dot(x, p);
    let mut dm = vec![vec![0.0; 2 * n]; n];
    for j in 0..n {
        dm[j][n + j] = 1.0;
        dm[j][j] -= 2.0 * xp / d;
        for k in 0..n {
            dm[j][k] += 2.0 * (x[k] * p[j] + x[j] * p[k]) / d;
        }
    }
    let g = 4.0 / (d * d);
    let ginv = 1.0 / g;
    RMatrix::from_fn(2 * n, |a, b| {
        let base = if a == b && a < n { g } else { 0.0 };
        base + ginv * (0..n).map(|j| dm[j][a] * dm[j][b]).sum::<f64>()
    })
}

/// `Σdx² + Σdξ² − (Σx dξ)²` evaluated on tangent vectors `(dx_a, dξ_a)`.
pub fn intrinsic_sasaki(x: &[f64], dx: &[Vec<f64>], dxi: &[Vec<f64>]) -> RMatrix {
    let m = dx.len();
    let c: Vec<f64> = dxi.iter().map(|v| dot(x, v)).collect();
    RMatrix::from_fn(m, |a, b| dot(&dx[a], &dx[b]) + dot(&dxi[a], &dxi[b]) - c[a] * c[b])
}

/// Pullback of [`intrinsic_sasaki`] through the Moser map, by finite differences.
pub fn moser_pullback_sasaki(y: &[f64], eta: &[f64]) -> Result<RMatrix> {
    let n = y.len();
    let mut v = y.to_vec();
    v.extend_from_slice(eta);
    let split = |s: &[f64]| FlatCotangentPoint { y: s[..n].to_vec(), eta: s[n..].to_vec() };
    let h = Some(1e-6 * (1.0 + norm(&v)));
    let jx = fd_jacobian(|s| moser_forward(&split(s)).point.x, &v, h)?;
    let jxi = fd_jacobian(|s| moser_forward(&split(s)).point.xi, &v, h)?;
    let img = moser_forward(&split(&v)).point;
    let col = |jac: &Vec<Vec<f64>>, a: usize| jac.iter().map(|row| row[a]).collect::<Vec<f64>>();
    let dx: Vec<Vec<f64>> = (0..2 * n).map(|a| col(&jx, a)).collect();
    let dxi: Vec<Vec<f64>> = (0..2 * n).map(|a| col(&jxi, a)).collect();
    Ok(intrinsic_sasaki(&img.x, &dx, &dxi))
}

/// Inverse of the Moser map: `y_j = x_j/(1−x₀)`, `η_j = (1−x₀)ξ_j + ξ₀x_j`.
pub fn moser_inverse(kp: &KeplerPoint) -> Result<FlatCotangentPoint> {
    let (x, xi) = (&kp.x, &kp.xi);
    let s = 1.0 - x[0];
    if s.abs() < 1e-12 {
        return Err(GeomError::Chart("stereographic pole x₀ = 1".into()));
    }
    let n = x.len() - 1;
    let y = (1..=n).map(|j| x[j] / s).collect();
    let eta = (1..=n).map(|j| s * xi[j] + xi[0] * x[j]).collect();
    Ok(FlatCotangentPoint { y, eta })
}

/// Differential of [`moser_inverse`] applied to a tangent vector `(dx, dξ)`.
pub fn moser_inverse_differential(kp: &KeplerPoint, dx: &[f64], dxi: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let (x, xi) = (&kp.x, &kp.xi);
    let s = 1.0 - x[0];
    if s.abs() < 1e-12 {
        return Err(GeomError::Chart("stereographic pole x₀ = 1".into()));
    }
    let n = x.len() - 1;
    let dy = (1..=n).map(|j| dx[j] / s + x[j] * dx[0] / (s * s)).collect();
    let deta = (1..=n).map(|j| -dx[0] * xi[j] + s * dxi[j] + dxi[0] * x[j] + xi[0] * dx[j]).collect();
    Ok((dy, deta))
}
