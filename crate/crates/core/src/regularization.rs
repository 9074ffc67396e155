//! Planar Kepler dynamics, Levi-Civita regularization, the Moser map into
//! the cotangent bundle of the sphere, and Lie scaling.
//!
//! Levi-Civita convention here: `x + iy = (ξ + iη)²` and
//! `p − iq = (ω − iχ) / (2(ξ + iη))`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::numkit::{dot, fd_gradient, fd_jacobian, norm, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseState2D {
    pub x: f64,
    pub y: f64,
    pub p: f64,
    pub q: f64,
}

impl PhaseState2D {
    pub fn new(x: f64, y: f64, p: f64, q: f64) -> Self {
        Self { x, y, p, q }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.x, self.y, self.p, self.q]
    }

    pub fn from_slice(v: &[f64]) -> Self {
        Self::new(v[0], v[1], v[2], v[3])
    }

    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Regularized coordinates (ξ, η, ω, χ).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LCState {
    pub xi: f64,
    pub eta: f64,
    pub omega: f64,
    pub chi: f64,
}

impl LCState {
    pub fn new(xi: f64, eta: f64, omega: f64, chi: f64) -> Self {
        Self { xi, eta, omega, chi }
    }

    fn zeta(&self) -> C64 {
        C64::new(self.xi, self.eta)
    }

    fn big_omega(&self) -> C64 {
        C64::new(self.omega, self.chi)
    }
}

/// Kepler Hamiltonian ½(p²+q²) − 1/ρ.
pub fn kepler_hamiltonian(s: &PhaseState2D) -> Result<f64> {
    let rho = s.radius();
    if rho == 0.0 {
        return Err(GeomError::Domain("collision (ρ = 0)".into()));
    }
    Ok(0.5 * (s.p * s.p + s.q * s.q) - 1.0 / rho)
}

/// (ẋ, ẏ, ṗ, q̇) = (p, q, −x/ρ³, −y/ρ³), together with the energy.
pub fn kepler_vector_field(s: &PhaseState2D) -> Result<([f64; 4], f64)> {
    let h = kepler_hamiltonian(s)?;
    let r3 = s.radius().powi(3);
    Ok(([s.p, s.q, -s.x / r3, -s.y / r3], h))
}

/// `{f, g} = Σ ∂f/∂p·∂g/∂x − ∂f/∂x·∂g/∂p` over the pairs (x,p), (y,q),
/// evaluated with finite differences. With this sign, `ġ = {H, g}`.
pub fn poisson_bracket(f: impl Fn(&[f64]) -> f64, g: impl Fn(&[f64]) -> f64, s: &PhaseState2D) -> Result<f64> {
    let pt = s.as_array();
    let df = fd_gradient(f, &pt, None)?;
    let dg = fd_gradient(g, &pt, None)?;
    Ok(df[2] * dg[0] - df[0] * dg[2] + df[3] * dg[1] - df[1] * dg[3])
}

pub fn lc_forward(s: &LCState) -> Result<PhaseState2D> {
    let z = s.zeta();
    if z.norm_sqr() == 0.0 {
        return Err(GeomError::Domain("Levi-Civita map undefined at ξ = η = 0".into()));
    }
    let pos = z * z;
    let mom = s.big_omega().conj() / (2.0 * z); // p − iq
    Ok(PhaseState2D::new(pos.re, pos.im, mom.re, -mom.im))
}

/// One of the two preimages of [`lc_forward`]: the branch with `ξ ≥ 0`
/// (principal square root).
pub fn lc_inverse(s: &PhaseState2D) -> Result<LCState> {
    let pos = C64::new(s.x, s.y);
    if pos.norm_sqr() == 0.0 {
        return Err(GeomError::Domain("collision (ρ = 0)".into()));
    }
    let z = pos.sqrt();
    let om_bar = C64::new(s.p, -s.q) * 2.0 * z; // ω − iχ
    Ok(LCState::new(z.re, z.im, om_bar.re, -om_bar.im))
}

/// Energy in regularized variables: `(¼|ω+iχ|² − 2) / (2|ξ+iη|²)`.
pub fn lc_hamiltonian(s: &LCState) -> Result<f64> {
    let r = s.zeta().norm_sqr();
    if r == 0.0 {
        return Err(GeomError::Domain("Levi-Civita map undefined at ξ = η = 0".into()));
    }
    Ok((0.25 * s.big_omega().norm_sqr() - 2.0) / (2.0 * r))
}

/// `|ω+iχ|² − 8(1 + E|ξ+iη|²)`; zero exactly on the energy-E surface.
pub fn lc_energy_residual(s: &LCState, e: f64) -> f64 {
    s.big_omega().norm_sqr() - 8.0 * (1.0 + e * s.zeta().norm_sqr())
}

/// Angular frequency of the regularized oscillator at energy `e < 0`.
pub fn regularized_frequency(e: f64) -> f64 {
    (-e / 2.0).sqrt()
}

/// One sample of a regularized trajectory.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRow {
    pub tau: f64,
    pub xi: f64,
    pub eta: f64,
    pub omega: f64,
    pub chi: f64,
    pub x: f64,
    pub y: f64,
    pub p: f64,
    pub q: f64,
    pub h_residual: f64,
}

impl TrajectoryRow {
    pub fn state(&self) -> LCState {
        LCState::new(self.xi, self.eta, self.omega, self.chi)
    }
}

fn lc_rhs(e: f64, v: &[f64; 4]) -> [f64; 4] {
    [0.25 * v[2], 0.25 * v[3], 2.0 * e * v[0], 2.0 * e * v[1]]
}

/// RK4 integration of `ζ' = ¼Ω`, `Ω' = 2Eζ` (ζ = ξ+iη, Ω = ω+iχ) on
/// `[0, tau_end]`. The default step is one 512th of the oscillation period.
///
/// The x..q columns are filled when ζ ≠ 0 and are NaN at collisions.
pub fn integrate_regularized(e: f64, init: &LCState, tau_end: f64, dt: Option<f64>) -> Result<Vec<TrajectoryRow>> {
    if !(e < 0.0) {
        return Err(GeomError::Domain(format!("bound orbits need E < 0, got {e}")));
    }
    let r0 = lc_energy_residual(init, e);
    if r0.abs() >= 1e-8 {
        return Err(GeomError::Domain(format!("initial state off the energy surface (residual {r0:e})")));
    }
    if !(tau_end >= 0.0) {
        return Err(GeomError::Config("tau span must be non-negative".into()));
    }
    let period = 2.0 * std::f64::consts::PI / regularized_frequency(e);
    let dt = dt.unwrap_or(period / 512.0);
    if !(dt > 0.0) {
        return Err(GeomError::Config("step must be positive".into()));
    }
    let steps = (tau_end / dt).round() as usize;
    let mut v = [init.xi, init.eta, init.omega, init.chi];
    let mut rows = Vec::with_capacity(steps + 1);
    let row = |tau: f64, v: &[f64; 4]| {
        let s = LCState::new(v[0], v[1], v[2], v[3]);
        let ph = lc_forward(&s).unwrap_or(PhaseState2D::new(f64::NAN, f64::NAN, f64::NAN, f64::NAN));
        TrajectoryRow {
            tau,
            xi: v[0],
            eta: v[1],
            omega: v[2],
            chi: v[3],
            x: ph.x,
            y: ph.y,
            p: ph.p,
            q: ph.q,
            h_residual: lc_energy_residual(&s, e),
        }
    };
    rows.push(row(0.0, &v));
    let add = |a: &[f64; 4], b: &[f64; 4], s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2], a[3] + s * b[3]];
    for k in 1..=steps {
        let k1 = lc_rhs(e, &v);
        let k2 = lc_rhs(e, &add(&v, &k1, 0.5 * dt));
        let k3 = lc_rhs(e, &add(&v, &k2, 0.5 * dt));
        let k4 = lc_rhs(e, &add(&v, &k3, dt));
        for i in 0..4 {
            v[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        rows.push(row(k as f64 * dt, &v));
    }
    Ok(rows)
}

/// A point of the cotangent bundle of Rⁿ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatCotangentPoint {
    pub y: Vec<f64>,
    pub eta: Vec<f64>,
}

/// A point of T⁺Sⁿ ⊂ R^{n+1} × R^{n+1}: unit `x` and nonzero `ξ ⟂ x`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KeplerPoint {
    pub x: Vec<f64>,
    pub xi: Vec<f64>,
}

/// Moser map output, flagged when η = 0 sends the point to the zero section.
#[derive(Clone, Debug, PartialEq)]
pub struct MoserImage {
    pub point: KeplerPoint,
    pub on_zero_section: bool,
}

/// Stereographic position part of the Moser map.
pub fn moser_position(y: &[f64]) -> Vec<f64> {
    let r2 = dot(y, y);
    let d = r2 + 1.0;
    let mut x = Vec::with_capacity(y.len() + 1);
    x.push((r2 - 1.0) / d);
    x.extend(y.iter().map(|v| 2.0 * v / d));
    x
}

pub fn moser_forward(pt: &FlatCotangentPoint) -> MoserImage {
    let y = &pt.y;
    let eta = &pt.eta;
    let r2 = dot(y, y);
    let ey = dot(eta, y);
    let half = 0.5 * (r2 + 1.0);
    let mut xi = Vec::with_capacity(y.len() + 1);
    xi.push(ey);
    xi.extend(y.iter().zip(eta).map(|(yj, ej)| half * ej - ey * yj));
    let on_zero_section = xi.iter().all(|v| *v == 0.0);
    MoserImage { point: KeplerPoint { x: moser_position(y), xi }, on_zero_section }
}

/// Residuals of the Moser-map identities at one point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MoserResiduals {
    /// `|x|² − 1`
    pub unit: f64,
    /// `x · ξ`
    pub orthogonal: f64,
    /// max_j |η_j − ((1−x₀)ξ_j + ξ₀x_j)|
    pub reconstruction: f64,
    /// max over sampled directions v of |ξ·Dx(v) − η·v|
    pub pullback: f64,
}

impl MoserResiduals {
    pub fn max(&self) -> f64 {
        self.unit.abs().max(self.orthogonal.abs()).max(self.reconstruction).max(self.pullback)
    }
}

/// Evaluate all four identities; the pullback of `ξ·dx` is tested on
/// `directions` random unit tangent vectors via centered differences.
pub fn moser_identity_residuals<R: Rng + ?Sized>(
    pt: &FlatCotangentPoint,
    rng: &mut R,
    directions: usize,
) -> Result<MoserResiduals> {
    let img = moser_forward(pt).point;
    let (x, xi) = (&img.x, &img.xi);
    let unit = dot(x, x) - 1.0;
    let orthogonal = dot(x, xi);
    let reconstruction =
        (0..pt.y.len()).map(|j| (pt.eta[j] - ((1.0 - x[0]) * xi[j + 1] + xi[0] * x[j + 1])).abs()).fold(0.0, f64::max);
    let jac = fd_jacobian(moser_position, &pt.y, Some(1e-5 * (1.0 + norm(&pt.y))))?;
    let n = pt.y.len();
    let mut pullback: f64 = 0.0;
    for _ in 0..directions {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let nv = norm(&v).max(1e-300);
        v.iter_mut().for_each(|c| *c /= nv);
        let dx: Vec<f64> = jac.iter().map(|row| dot(row, &v)).collect();
        pullback = pullback.max((dot(xi, &dx) - dot(&pt.eta, &v)).abs());
    }
    Ok(MoserResiduals { unit, orthogonal, reconstruction, pullback })
}

/// `½|ξ|²|x|²`, the Hamiltonian of the geodesic flow on the round sphere.
pub fn geodesic_hamiltonian(kp: &KeplerPoint) -> f64 {
    0.5 * dot(&kp.xi, &kp.xi) * dot(&kp.x, &kp.x)
}

/// `(λ²x, λ²y, p/λ, q/λ)`, under which the energy scales by `1/λ²`.
pub fn lie_scale(s: &PhaseState2D, lambda: f64) -> Result<PhaseState2D> {
    if !(lambda > 0.0) {
        return Err(GeomError::Domain(format!("scale factor must be positive, got {lambda}")));
    }
    let l2 = lambda * lambda;
    Ok(PhaseState2D::new(l2 * s.x, l2 * s.y, s.p / lambda, s.q / lambda))
}
