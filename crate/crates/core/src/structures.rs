//! Complex structures on the 2-dimensional Kepler manifold, the Levi-Civita
//! covering, the conifold/Kepler identification, and coordinate charts of
//! the small and big resolutions of the 3-conifold.
//!
//! Momentum convention for the complex-structure work:
//! `x + iy = (ξ + iη)²`, `p − iq = (ω − iχ)/(ξ + iη)` (no factor 2).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::numkit::{cnorm_sqr, dot, fd_jacobian, mat_inverse, norm, RMatrix, C64, I};
use crate::regularization::{KeplerPoint, PhaseState2D};

/// Point of `{Σ w_j² = a}` in C^{n+1}.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConifoldPoint {
    pub w: Vec<C64>,
    pub a: C64,
}

impl ConifoldPoint {
    pub fn new(w: Vec<C64>, a: C64) -> Result<Self> {
        let s: C64 = w.iter().map(|z| z * z).sum();
        let scale = 1.0 + cnorm_sqr(&w);
        if (s - a).norm() > 1e-10 * scale {
            return Err(GeomError::Domain(format!("Σw² − a = {:e} off the quadric", (s - a).norm())));
        }
        if a == C64::new(0.0, 0.0) && cnorm_sqr(&w) == 0.0 {
            return Err(GeomError::Domain("cone vertex".into()));
        }
        Ok(Self { w, a })
    }

    /// The same point with its largest coordinate (the first, on ties) swapped into `w₀`.
    ///
    /// The quadric and `Σ|w|²` are invariant under permutations, so every
    /// radial metric is too; the chart `w₁..w_n` is best conditioned when
    /// `|w₀|` is largest.
    pub fn principal_chart(&self) -> Self {
        let k = (0..self.w.len()).rev().max_by(|&i, &j| self.w[i].norm().total_cmp(&self.w[j].norm())).unwrap_or(0);
        let mut w = self.w.clone();
        w.swap(0, k);
        Self { w, a: self.a }
    }
}

/// `w = u + iv ↦ (u/|u|, v)`.
pub fn conifold_to_kepler(pt: &ConifoldPoint) -> Result<KeplerPoint> {
    let u: Vec<f64> = pt.w.iter().map(|z| z.re).collect();
    let nu = norm(&u);
    if nu == 0.0 {
        return Err(GeomError::Domain("Re w = 0 cannot occur on the punctured cone".into()));
    }
    Ok(KeplerPoint { x: u.iter().map(|v| v / nu).collect(), xi: pt.w.iter().map(|z| z.im).collect() })
}

/// `(x, ξ) ↦ |ξ|x + iξ`.
pub fn kepler_to_conifold(kp: &KeplerPoint) -> ConifoldPoint {
    let r = norm(&kp.xi);
    let w = kp.x.iter().zip(&kp.xi).map(|(x, v)| C64::new(r * x, *v)).collect();
    ConifoldPoint { w, a: C64::new(0.0, 0.0) }
}

/// Uniform-ish random point of the punctured n-conifold in C^{n+1}.
pub fn random_cone_point<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ConifoldPoint {
    let x = random_unit(n + 1, rng);
    let mut xi: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let d = dot(&xi, &x);
    xi.iter_mut().zip(&x).for_each(|(v, xv)| *v -= d * xv);
    if norm(&xi) < 1e-3 {
        xi = orthogonal_unit(&x);
    }
    kepler_to_conifold(&KeplerPoint { x, xi })
}

fn random_unit<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let r = norm(&v);
        if r > 1e-3 && r <= 1.0 {
            return v.iter().map(|c| c / r).collect();
        }
    }
}

fn orthogonal_unit(x: &[f64]) -> Vec<f64> {
    let k = (0..x.len()).min_by(|&i, &j| x[i].abs().total_cmp(&x[j].abs())).unwrap_or(0);
    let mut e = vec![0.0; x.len()];
    e[k] = 1.0;
    let d = dot(&e, x);
    e.iter_mut().zip(x).for_each(|(v, xv)| *v -= d * xv);
    let r = norm(&e);
    e.iter().map(|v| v / r).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JLabel {
    J1,
    J2,
    J3,
}

impl JLabel {
    pub const ALL: [JLabel; 3] = [JLabel::J1, JLabel::J2, JLabel::J3];
}

/// Matrix of `J` on the basis (∂x, ∂y, ∂p, ∂q); column k is the image of
/// the k-th basis vector.
pub fn j_matrix(label: JLabel, s: &PhaseState2D) -> Result<RMatrix> {
    let j1 = RMatrix::from_rows(&[
        vec![0.0, -1.0, 0.0, 0.0],
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0, 1.0],
        vec![0.0, 0.0, -1.0, 0.0],
    ]);
    if label == JLabel::J1 {
        return Ok(j1);
    }
    let rho = s.radius();
    if rho == 0.0 {
        return Err(GeomError::Domain("J₂ undefined at x = y = 0".into()));
    }
    let PhaseState2D { x, y, p, q } = *s;
    let a = (p * x - q * y) / rho;
    let b = (y * p + x * q) / rho;
    let c = (p * p + q * q + 1.0) / (2.0 * rho);
    let d = 2.0 * rho;
    // columns: J₂∂x = A∂x + B∂y − C∂p, J₂∂y = B∂x − A∂y − C∂q,
    // J₂∂p = D∂x − A∂p − B∂q, J₂∂q = D∂y − B∂p + A∂q
    let j2 =
        RMatrix::from_rows(&[vec![a, b, d, 0.0], vec![b, -a, 0.0, d], vec![-c, 0.0, -a, -b], vec![0.0, -c, -b, a]]);
    Ok(match label {
        JLabel::J2 => j2,
        _ => j1.matmul(&j2),
    })
}

/// Residuals of the quaternion relations at one point:
/// max over `J_k² + I`, `J₁J₂ − J₃`, `J₂J₁ + J₃`.
pub fn quaternion_residual(s: &PhaseState2D) -> Result<f64> {
    let id = RMatrix::identity(4);
    let j1 = j_matrix(JLabel::J1, s)?;
    let j2 = j_matrix(JLabel::J2, s)?;
    let j3 = j_matrix(JLabel::J3, s)?;
    let mut r: f64 = 0.0;
    for j in [&j1, &j2, &j3] {
        r = r.max(j.matmul(j).add(&id).max_abs());
    }
    r = r.max(j1.matmul(&j2).sub(&j3).max_abs());
    r = r.max(j2.matmul(&j1).add(&j3).max_abs());
    Ok(r)
}

/// `max_{a,b} |N_J(∂_a, ∂_b)|` with brackets of the J-field computed by
/// centered differences of step `h`.
///
/// On coordinate fields `[∂_a, ∂_b] = 0`, so with `J_a = J∂_a`:
/// `N(∂_a, ∂_b) = −J ∂_b J_a + J ∂_a J_b − (∇_{J_a} J_b − ∇_{J_b} J_a)`.
pub fn nijenhuis_residual(label: JLabel, s: &PhaseState2D, h: f64) -> Result<f64> {
    let j = j_matrix(label, s)?;
    let base = s.as_array();
    // dj[k] = ∂J/∂coord_k
    let mut dj = Vec::with_capacity(4);
    for k in 0..4 {
        let mut pp = base;
        let mut pm = base;
        pp[k] += h;
        pm[k] -= h;
        let jp = j_matrix(label, &PhaseState2D::from_slice(&pp))?;
        let jm = j_matrix(label, &PhaseState2D::from_slice(&pm))?;
        dj.push(jp.sub(&jm).scale(1.0 / (2.0 * h)));
    }
    let col = |m: &RMatrix, c: usize| -> [f64; 4] { [m[(0, c)], m[(1, c)], m[(2, c)], m[(3, c)]] };
    // derivative of column c along vector v
    let along = |c: usize, v: &[f64; 4]| -> [f64; 4] {
        let mut out = [0.0; 4];
        for k in 0..4 {
            let d = col(&dj[k], c);
            for i in 0..4 {
                out[i] += v[k] * d[i];
            }
        }
        out
    };
    let mut worst: f64 = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            let ja = col(&j, a);
            let jb = col(&j, b);
            let db_ja = col(&dj[b], a);
            let da_jb = col(&dj[a], b);
            let mut t = [0.0; 4];
            for i in 0..4 {
                t[i] = da_jb[i] - db_ja[i];
            }
            let jt = j.matvec(&t);
            let br1 = along(b, &ja);
            let br2 = along(a, &jb);
            for i in 0..4 {
                worst = worst.max((jt[i] - (br1[i] - br2[i])).abs());
            }
        }
    }
    Ok(worst)
}

/// The 2:1 map `(ξ, η, ω, χ) ↦ (x, y, p, q)`.
pub fn levi_civita_map(v: &[f64]) -> Result<PhaseState2D> {
    let z = C64::new(v[0], v[1]);
    if z.norm_sqr() == 0.0 {
        return Err(GeomError::Domain("Levi-Civita map undefined at ξ = η = 0".into()));
    }
    let pos = z * z;
    let mom = C64::new(v[2], -v[3]) / z;
    Ok(PhaseState2D::new(pos.re, pos.im, mom.re, -mom.im))
}

fn lc_jacobian(v: &[f64]) -> Result<RMatrix> {
    levi_civita_map(v)?;
    let h = 1e-5 * (1.0 + norm(v));
    let jac =
        fd_jacobian(|u| levi_civita_map(u).map(|s| s.as_array().to_vec()).unwrap_or(vec![f64::NAN; 4]), v, Some(h))?;
    Ok(RMatrix::from_rows(&jac))
}

/// Constant quaternionic structures on R⁴ that the J's pull back to,
/// on the basis (∂ξ, ∂η, ∂ω, ∂χ).
pub fn lc_constant_j(label: JLabel) -> RMatrix {
    let cols: [[f64; 4]; 4] = match label {
        JLabel::J1 => [[0., 1., 0., 0.], [-1., 0., 0., 0.], [0., 0., 0., -1.], [0., 0., 1., 0.]],
        JLabel::J2 => [[0., 0., -1., 0.], [0., 0., 0., -1.], [1., 0., 0., 0.], [0., 1., 0., 0.]],
        JLabel::J3 => [[0., 0., 0., 1.], [0., 0., -1., 0.], [0., 1., 0., 0.], [-1., 0., 0., 0.]],
    };
    RMatrix::from_fn(4, |i, j| cols[j][i])
}

/// `(dφ)⁻¹ J dφ` at a point of R⁴ ∖ {ξ = η = 0}.
pub fn lc_pullback_j(label: JLabel, v: &[f64]) -> Result<RMatrix> {
    let d = lc_jacobian(v)?;
    let s = levi_civita_map(v)?;
    let j = j_matrix(label, &s)?;
    Ok(mat_inverse(&d)?.matmul(&j.matmul(&d)))
}

/// Matrix `Ω_ab = φ*(dp∧dx + dq∧dy)(∂_a, ∂_b)` on (∂ξ, ∂η, ∂ω, ∂χ).
pub fn lc_pullback_symplectic(v: &[f64]) -> Result<RMatrix> {
    let d = lc_jacobian(v)?;
    let w = RMatrix::from_rows(&[
        vec![0.0, 0.0, -1.0, 0.0],
        vec![0.0, 0.0, 0.0, -1.0],
        vec![1.0, 0.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0, 0.0],
    ]);
    Ok(d.transpose().matmul(&w.matmul(&d)))
}

/// Component matrix of `2dω∧dξ + 2dχ∧dη`.
pub fn lc_expected_symplectic() -> RMatrix {
    RMatrix::from_rows(&[
        vec![0.0, 0.0, -2.0, 0.0],
        vec![0.0, 0.0, 0.0, -2.0],
        vec![2.0, 0.0, 0.0, 0.0],
        vec![0.0, 2.0, 0.0, 0.0],
    ])
}

/// `z₁ = w₀+iw₁, z₂ = w₀−iw₁, z₃ = iw₂+w₃, z₄ = iw₂−w₃`; on the cone z₁z₂ = z₃z₄.
pub fn z_from_w(w: &[C64; 4]) -> [C64; 4] {
    [w[0] + I * w[1], w[0] - I * w[1], I * w[2] + w[3], I * w[2] - w[3]]
}

pub fn w_from_z(z: &[C64; 4]) -> [C64; 4] {
    [(z[0] + z[1]) * 0.5, (z[0] - z[1]) / (2.0 * I), (z[2] + z[3]) / (2.0 * I), (z[2] - z[3]) * 0.5]
}

/// Coordinate patches on resolutions of the 3-conifold.
///
/// `BigResolution(k)`: patch k = 1..4 of O(−1,−1) over P¹×P¹ with
/// coordinates (α_{k,1}, α_{k,2}, β_k). `SmallResolution(k)`: patches
/// 1, 2 (one small resolution) and 3, 4 (its flop) of O(−1)⊕O(−1) with
/// coordinates (α_k, β_{k,1}, β_{k,2}).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ChartId {
    BigResolution(u8),
    SmallResolution(u8),
}

impl ChartId {
    pub fn all() -> Vec<ChartId> {
        (1..=4).map(ChartId::BigResolution).chain((1..=4).map(ChartId::SmallResolution)).collect()
    }

    fn check(self) -> Result<()> {
        match self {
            ChartId::BigResolution(k) | ChartId::SmallResolution(k) if (1..=4).contains(&k) => Ok(()),
            _ => Err(GeomError::Config(format!("unknown chart {self:?}"))),
        }
    }

    /// Index (0-based) of the z-variable that must be nonzero on this patch.
    fn pivot(self) -> usize {
        match self {
            ChartId::BigResolution(k) => (k - 1) as usize,
            ChartId::SmallResolution(k) => [0, 1, 2, 3][(k - 1) as usize],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResolvedChartPoint {
    pub chart: ChartId,
    pub coords: [C64; 3],
}

/// Chart coordinates of a cone point given by its z-variables.
pub fn chart_from_z(z: &[C64; 4], chart: ChartId) -> Result<ResolvedChartPoint> {
    chart.check()?;
    let piv = z[chart.pivot()];
    if piv.norm() == 0.0 {
        return Err(GeomError::Domain(format!("point not in the overlap with {chart:?}")));
    }
    let [z1, z2, z3, z4] = *z;
    let coords = match chart {
        ChartId::BigResolution(1) => [z3 / z1, z4 / z1, z1],
        ChartId::BigResolution(2) => [z4 / z2, z3 / z2, z2],
        ChartId::BigResolution(3) => [z1 / z3, z2 / z3, z3],
        ChartId::BigResolution(_) => [z2 / z4, z1 / z4, z4],
        ChartId::SmallResolution(1) => [z3 / z1, z1, z4],
        ChartId::SmallResolution(2) => [z4 / z2, z3, z2],
        ChartId::SmallResolution(3) => [z1 / z3, z2, z3],
        ChartId::SmallResolution(_) => [z2 / z4, z4, z1],
    };
    Ok(ResolvedChartPoint { chart, coords })
}

/// Recover z₁..z₄ from chart coordinates (using z₁z₂ = z₃z₄ for the
/// dependent one).
pub fn z_from_chart(p: &ResolvedChartPoint) -> Result<[C64; 4]> {
    p.chart.check()?;
    let [a, b, c] = p.coords;
    Ok(match p.chart {
        ChartId::BigResolution(1) => [c, a * b * c, a * c, b * c],
        ChartId::BigResolution(2) => [a * b * c, c, b * c, a * c],
        ChartId::BigResolution(3) => [a * c, b * c, c, a * b * c],
        ChartId::BigResolution(_) => [b * c, a * c, a * b * c, c],
        ChartId::SmallResolution(1) => [b, a * c, a * b, c],
        ChartId::SmallResolution(2) => [b * a, c, b, a * c],
        ChartId::SmallResolution(3) => [a * c, b, c, a * b],
        ChartId::SmallResolution(_) => [c, a * b, a * c, b],
    })
}

pub fn chart_transition(p: &ResolvedChartPoint, target: ChartId) -> Result<ResolvedChartPoint> {
    chart_from_z(&z_from_chart(p)?, target)
}

/// Residuals of the norm identities on the 3-conifold:
/// `r₁ = Σ|w|² − ½Σ|z|²` and `r₂` the largest deviation of the
/// chart-norm products from `Σ|z|²` over every patch.
pub fn norm_identities_residual(w: &[C64; 4]) -> Result<(f64, f64)> {
    let z = z_from_w(w);
    let total = cnorm_sqr(&z);
    let r1 = cnorm_sqr(w) - 0.5 * total;
    let mut r2: f64 = 0.0;
    for chart in ChartId::all() {
        let p = chart_from_z(&z, chart)?;
        let [a, b, c] = p.coords;
        let prod = match chart {
            ChartId::BigResolution(_) => (1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr()) * c.norm_sqr(),
            ChartId::SmallResolution(_) => (1.0 + a.norm_sqr()) * (b.norm_sqr() + c.norm_sqr()),
        };
        r2 = r2.max((prod - total).abs());
    }
    Ok((r1, r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn conifold_example() {
        let pt = ConifoldPoint::new(vec![c(0.0, 1.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)], c(0.0, 0.0)).unwrap();
        let kp = conifold_to_kepler(&pt).unwrap();
        assert_eq!(kp.x, vec![0.0, 1.0, 0.0, 0.0]);
        assert_eq!(kp.xi, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(kepler_to_conifold(&kp).w, pt.w);
    }

    #[test]
    fn off_quadric_rejected() {
        assert!(ConifoldPoint::new(vec![c(1.0, 0.0), c(0.0, 0.0)], c(0.0, 0.0)).is_err());
        assert!(ConifoldPoint::new(vec![c(0.0, 0.0); 3], c(0.0, 0.0)).is_err());
    }

    #[test]
    fn principal_chart_keeps_the_point() {
        let pt = ConifoldPoint::new(vec![c(0.1, 0.0), c(0.0, 2.0), c(2.0, 0.0), c(0.0, 0.1)], c(0.0, 0.0)).unwrap();
        let q = pt.principal_chart();
        assert_eq!(q.w[0], c(0.0, 2.0));
        assert_eq!(q.w[1], c(0.1, 0.0));
        let s: C64 = q.w.iter().map(|z| z * z).sum();
        assert!(s.norm() < 1e-15);
        assert_eq!(cnorm_sqr(&q.w), cnorm_sqr(&pt.w));
    }

    #[test]
    fn j1_is_the_stated_block() {
        let j = j_matrix(JLabel::J1, &PhaseState2D::new(0.3, 0.2, 1.0, -1.0)).unwrap();
        assert_eq!(j[(1, 0)], 1.0); // ∂x ↦ ∂y
        assert_eq!(j[(3, 2)], -1.0); // ∂p ↦ −∂q
    }

    #[test]
    fn j1_nijenhuis_vanishes_exactly() {
        let r = nijenhuis_residual(JLabel::J1, &PhaseState2D::new(0.3, 0.2, 1.0, -1.0), 1e-4).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn pullback_at_unit_point() {
        let v = [1.0, 0.0, 0.0, 0.0];
        let w = lc_pullback_symplectic(&v).unwrap();
        assert!(w.sub(&lc_expected_symplectic()).max_abs() < 1e-9);
        assert_eq!(w.add(&w.transpose()).max_abs(), 0.0);
    }

    #[test]
    fn chart_reciprocal_and_round_trip() {
        let z = [c(1.0, 0.0); 4];
        let p1 = chart_from_z(&z, ChartId::BigResolution(1)).unwrap();
        let p3 = chart_transition(&p1, ChartId::BigResolution(3)).unwrap();
        assert_eq!(p3.coords[0], c(1.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let cp = random_cone_point(3, &mut rng);
        let w = [cp.w[0], cp.w[1], cp.w[2], cp.w[3]];
        let z = z_from_w(&w);
        for from in ChartId::all() {
            let p = chart_from_z(&z, from).unwrap();
            for to in ChartId::all() {
                let back = chart_transition(&chart_transition(&p, to).unwrap(), from).unwrap();
                for k in 0..3 {
                    assert!((back.coords[k] - p.coords[k]).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_denominator_rejected() {
        let z = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(2.0, 0.0)];
        assert!(chart_from_z(&z, ChartId::BigResolution(1)).is_err());
    }

    #[test]
    fn norm_identities_example() {
        let w = [c(0.0, 1.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)];
        // z₃ = z₄ = 0 here, so only the patches centered on z₁, z₂ exist.
        let z = z_from_w(&w);
        assert_eq!(cnorm_sqr(&w) - 0.5 * cnorm_sqr(&z), 0.0);
        let p = chart_from_z(&z, ChartId::BigResolution(1)).unwrap();
        let [a, b, cc] = p.coords;
        let prod = (1.0 + a.norm_sqr()) * (1.0 + b.norm_sqr()) * cc.norm_sqr();
        assert!((prod - cnorm_sqr(&z)).abs() < 1e-12);
    }
}
