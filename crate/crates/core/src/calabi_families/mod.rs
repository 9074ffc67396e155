//! Calabi-ansatz metrics `ω = Σ a_g·ω_FS,g + i∂∂̄φ(u)` on line-bundle charts.
//!
//! A chart has holomorphic coordinates `ζ`, split into base groups `g`
//! (each contributing `a_g ln(1 + Σ_{k∈g}|ζ_k|²)` to the potential) and
//! fiber coordinates `F`, with
//! `u = (Σ_{k∈F}|ζ_k|²)^e · Π_g(1 + Σ_{k∈g}|ζ_k|²)`.
//! The profile is stored as `u(y)` for `y = uφ′(u)`.
//!
//! Hermitian matrices use `ω = iΣH_{ab̄}dζ_a∧dζ̄_b`.

mod polar;
mod polytope;
mod profiles;
mod symplectic;
#[cfg(test)]
mod tests;

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use polar::{
    blowdown_o22, eh_chart_point, eh_cone_metric, eh_polar_metric, eh_pushforward, p1p1_chart_point, p1p1_polar_metric,
    p1p1_pushforward, quotient_display, quotient_map, quotient_printed_coords, zero_section_form, AngleMap,
    ZeroSectionVariant,
};
pub use polytope::{moment_polytope, ConvexDomain, Edge};
pub use profiles::{beta_roots, CubicProfile, EhProfile, Factor, KeplerLiftProfile};
pub use symplectic::{dual_potential_expected, family_g, family_psi};

use crate::error::{GeomError, Result};
use crate::metrics::{HermitianForm, RadialProfile};
use crate::numkit::{fd_ddbar, hermitian_eigenvalues, invert_monotone, mat_det, CMatrix, C64};
use crate::toric_hessian::{KahlerPotential, UProfile};

/// Family tag and parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FamilyKind {
    /// U(n)-invariant Ricci-flat `u = (yⁿ − bⁿ)^{1/n}` on Cⁿ.
    UnRf { n: usize, b: f64 },
    /// Its Z_n quotient in the chart `(v, w₂, …, wₙ)` of O(−n).
    QuotientOn { n: usize, b: f64 },
    /// Calabi ansatz on O(−2) → P¹ with `y = −a + √(C₁u² + C₂)`.
    Eh { a: f64, c1: f64, c2: f64 },
    /// Ricci-flat Calabi ansatz on O(−1)⊕O(−1) → P¹.
    Resolved3 { a: f64 },
    /// Ricci-flat Calabi ansatz on O(−1,−1) → P¹×P¹.
    P1p1 { a1: f64, a2: f64 },
    /// The same metric in the chart `(z₁, z₂, v = w²)` of O(−2,−2).
    O22 { a1: f64, a2: f64 },
    /// The Kepler potential `u^{1/2}` lifted to O(−1)⊕O(−1).
    KeplerK3Lift,
    /// The Ricci-flat cone `φ = (3/2)u^{2/3}` lifted to O(−1)⊕O(−1).
    KrfK3,
}

impl FamilyKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::UnRf { .. } => "UN_RF",
            Self::QuotientOn { .. } => "QUOTIENT_ON",
            Self::Eh { .. } => "EH",
            Self::Resolved3 { .. } => "RESOLVED3",
            Self::P1p1 { .. } => "P1P1",
            Self::O22 { .. } => "O22",
            Self::KeplerK3Lift => "KEPLER_K3_LIFT",
            Self::KrfK3 => "KRF_K3",
        }
    }

    /// Whether the family is Ricci-flat by construction.
    pub fn ricci_flat(&self) -> bool {
        !matches!(self, Self::KeplerK3Lift)
    }
}

/// A base group contributing `coeff·ln(1 + Σ_{k∈indices}|ζ_k|²)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BaseGroup {
    pub coeff: f64,
    pub indices: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Chart {
    pub dim: usize,
    pub names: Vec<String>,
    pub bases: Vec<BaseGroup>,
    pub fiber: Vec<usize>,
    /// Exponent `e` of the fiber norm in `u`.
    pub exponent: f64,
}

impl Chart {
    fn group_sums(&self, z: &[C64]) -> Vec<f64> {
        self.bases.iter().map(|g| g.indices.iter().map(|&k| z[k].norm_sqr()).sum()).collect()
    }

    fn fiber_norm(&self, z: &[C64]) -> f64 {
        self.fiber.iter().map(|&k| z[k].norm_sqr()).sum()
    }

    pub fn u(&self, z: &[C64]) -> f64 {
        let base: f64 = self.group_sums(z).iter().map(|s| 1.0 + s).product();
        self.fiber_norm(z).powf(self.exponent) * base
    }

    fn check(&self, z: &[C64]) -> Result<()> {
        if z.len() != self.dim {
            return Err(GeomError::Config(format!("expected {} chart coordinates, got {}", self.dim, z.len())));
        }
        if !(self.fiber_norm(z) > 0.0) {
            return Err(GeomError::Chart("fiber coordinates vanish (zero section)".into()));
        }
        Ok(())
    }

    /// `∂_a ln u` and `∂_a∂̄_b ln u`.
    fn log_u_derivatives(&self, z: &[C64]) -> (Vec<C64>, CMatrix) {
        let n = self.dim;
        let mut d = vec![C64::new(0.0, 0.0); n];
        let mut dd = CMatrix::zeros(n);
        let sums = self.group_sums(z);
        let mut block = |idx: &[usize], scale: f64, denom: f64| {
            for &a in idx {
                d[a] = z[a].conj() * (scale / denom);
                for &b in idx {
                    let delta = if a == b { 1.0 / denom } else { 0.0 };
                    dd[(a, b)] = (C64::new(delta, 0.0) - z[a].conj() * z[b] / (denom * denom)) * scale;
                }
            }
        };
        block(&self.fiber, self.exponent, self.fiber_norm(z));
        for (g, s) in self.bases.iter().zip(&sums) {
            block(&g.indices, 1.0, 1.0 + s);
        }
        (d, dd)
    }
}

/// A Calabi-ansatz family: chart, base coefficients and profile.
#[derive(Clone)]
pub struct AnsatzFamily {
    pub kind: FamilyKind,
    pub chart: Chart,
    pub profile: Arc<dyn UProfile>,
    phi: Arc<KahlerPotential<Arc<dyn UProfile>>>,
}

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn resolved_chart(a: f64) -> Chart {
    Chart {
        dim: 3,
        names: names(&["z", "w1", "w2"]),
        bases: vec![BaseGroup { coeff: a, indices: vec![0] }],
        fiber: vec![1, 2],
        exponent: 1.0,
    }
}

fn p1p1_chart(a1: f64, a2: f64, exponent: f64, last: &str) -> Chart {
    Chart {
        dim: 3,
        names: names(&["z1", "z2", last]),
        bases: vec![BaseGroup { coeff: a1, indices: vec![0] }, BaseGroup { coeff: a2, indices: vec![1] }],
        fiber: vec![2],
        exponent,
    }
}

fn nonneg(vals: &[f64]) -> Result<()> {
    if vals.iter().all(|v| *v >= 0.0 && v.is_finite()) {
        Ok(())
    } else {
        Err(GeomError::Config(format!("parameters must be finite and ≥ 0, got {vals:?}")))
    }
}

impl AnsatzFamily {
    pub fn new(kind: FamilyKind) -> Result<Self> {
        let (chart, profile): (Chart, Arc<dyn UProfile>) = match kind {
            FamilyKind::UnRf { n, b } => {
                nonneg(&[b])?;
                let chart = Chart {
                    dim: n,
                    names: (1..=n).map(|k| format!("z{k}")).collect(),
                    bases: vec![],
                    fiber: (0..n).collect(),
                    exponent: 1.0,
                };
                (chart, Arc::new(crate::toric_hessian::BProfile::new(n, b)?))
            }
            FamilyKind::QuotientOn { n, b } => {
                nonneg(&[b])?;
                if n < 2 {
                    return Err(GeomError::Config("the quotient chart needs n ≥ 2".into()));
                }
                let mut nm = vec!["v".to_string()];
                nm.extend((2..=n).map(|k| format!("w{k}")));
                let chart = Chart {
                    dim: n,
                    names: nm,
                    bases: vec![BaseGroup { coeff: 0.0, indices: (1..n).collect() }],
                    fiber: vec![0],
                    exponent: 1.0 / n as f64,
                };
                (chart, Arc::new(crate::toric_hessian::BProfile::new(n, b)?))
            }
            FamilyKind::Eh { a, c1, c2 } => {
                let chart = Chart {
                    dim: 2,
                    names: names(&["z", "w"]),
                    bases: vec![BaseGroup { coeff: a, indices: vec![0] }],
                    fiber: vec![1],
                    exponent: 1.0,
                };
                (chart, Arc::new(EhProfile::new(a, c1, c2)?))
            }
            FamilyKind::Resolved3 { a } => {
                nonneg(&[a])?;
                (resolved_chart(a), Arc::new(CubicProfile::new(a, 0.0, 2)?))
            }
            FamilyKind::KeplerK3Lift => (resolved_chart(0.0), Arc::new(KeplerLiftProfile)),
            FamilyKind::KrfK3 => (resolved_chart(0.0), Arc::new(CubicProfile::new(0.0, 0.0, 2)?)),
            FamilyKind::P1p1 { a1, a2 } => {
                nonneg(&[a1, a2])?;
                (p1p1_chart(a1, a2, 1.0, "w"), Arc::new(CubicProfile::new(a1, a2, 1)?))
            }
            FamilyKind::O22 { a1, a2 } => {
                nonneg(&[a1, a2])?;
                if !(a1 > 0.0 && a2 > 0.0) {
                    return Err(GeomError::Config(
                        "the O(−2,−2) chart needs a₁, a₂ > 0; with a₁a₂ = 0 blow down to O(−1)⊕O(−1) instead".into(),
                    ));
                }
                (p1p1_chart(a1, a2, 0.5, "v"), Arc::new(CubicProfile::new(a1, a2, 1)?))
            }
        };
        Ok(Self::with_profile(kind, chart, profile))
    }

    /// A family on a given chart with an arbitrary profile.
    pub fn with_profile(kind: FamilyKind, chart: Chart, profile: Arc<dyn UProfile>) -> Self {
        let phi = Arc::new(KahlerPotential::new(profile.clone()));
        Self { kind, chart, profile, phi }
    }

    pub fn dim(&self) -> usize {
        self.chart.dim
    }

    /// `φ(u)` as a radial profile.
    pub fn phi(&self) -> &dyn RadialProfile {
        self.phi.as_ref()
    }

    pub fn u(&self, z: &[C64]) -> f64 {
        self.chart.u(z)
    }

    /// `Σ a_g ln(1+S_g) + φ(u)`.
    pub fn potential(&self, z: &[C64]) -> Result<f64> {
        self.chart.check(z)?;
        let base: f64 =
            self.chart.bases.iter().zip(self.chart.group_sums(z)).map(|(g, s)| g.coeff * (1.0 + s).ln()).sum();
        Ok(base + self.phi.value(self.u(z))?)
    }

    /// `H = Σ a_g·FS_g + φ′∂∂̄u + φ″∂u∂̄u`, without a positivity check.
    pub fn hermitian(&self, z: &[C64]) -> Result<HermitianForm> {
        self.chart.check(z)?;
        let u = self.u(z);
        let y = self.profile.y_of_u(u)?;
        // uφ′ = y and u(φ′ + uφ″) = uy′ = 1/ℓ′, which avoids cancelling
        // the two large LL̄ terms near the zero section
        let uy1 = 1.0 / self.profile.dlog(y)?[0];
        let (l, ll) = self.chart.log_u_derivatives(z);
        let n = self.dim();
        let mut h = CMatrix::from_fn(n, |a, b| ll[(a, b)] * y + l[a] * l[b].conj() * uy1);
        let sums = self.chart.group_sums(z);
        for (g, s) in self.chart.bases.iter().zip(&sums) {
            for &a in &g.indices {
                for &b in &g.indices {
                    let delta = if a == b { 1.0 / (1.0 + s) } else { 0.0 };
                    h[(a, b)] += (C64::new(delta, 0.0) - z[a].conj() * z[b] / ((1.0 + s) * (1.0 + s))) * g.coeff;
                }
            }
        }
        Ok(h)
    }

    /// `Ric = −∂∂̄ log det H` by finite differences of the analytic `H`.
    pub fn ricci_fd(&self, z: &[C64], h: Option<f64>) -> Result<CMatrix> {
        let logdet = |v: &[C64]| self.hermitian(v).map(|m| mat_det(&m).re.ln()).unwrap_or(f64::NAN);
        let step = h.unwrap_or_else(|| {
            let scale = z.iter().map(|w| w.norm()).fold(f64::INFINITY, |m, r| m.min(r.max(0.3)));
            2e-3 * scale
        });
        let ric = fd_ddbar(logdet, z, Some(step))?;
        if !ric.is_finite() {
            return Err(GeomError::Evaluation("log det H near the chart boundary".into()));
        }
        Ok(ric.scale(C64::new(-1.0, 0.0)))
    }

    /// Moment coordinates of the chart torus at `z`. Base coordinates in a
    /// group of coefficient `a` are shifted by `−a`.
    pub fn moment(&self, z: &[C64]) -> Result<Vec<f64>> {
        self.chart.check(z)?;
        let u = self.u(z);
        let y = self.profile.y_of_u(u)?;
        let mut out = vec![0.0; self.dim()];
        let nf = self.chart.fiber_norm(z);
        for &k in &self.chart.fiber {
            out[k] = self.chart.exponent * y * z[k].norm_sqr() / nf;
        }
        for (g, s) in self.chart.bases.iter().zip(self.chart.group_sums(z)) {
            for &k in &g.indices {
                out[k] = (g.coeff + y) * z[k].norm_sqr() / (1.0 + s) - g.coeff;
            }
        }
        Ok(out)
    }

    /// The chart point with radii `r` and angles `theta`.
    pub fn point(&self, r: &[f64], theta: &[f64]) -> Vec<C64> {
        r.iter().zip(theta).map(|(ri, t)| C64::from_polar(*ri, *t)).collect()
    }

    /// Radii with moment coordinates `y`; `u` is recovered by monotone
    /// inversion of `u ↦ uφ′(u)`.
    pub fn inverse_moment(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.dim() {
            return Err(GeomError::Config(format!("expected {} moment coordinates", self.dim())));
        }
        let fiber_sum: f64 = self.chart.fiber.iter().map(|&k| y[k]).sum();
        let total = fiber_sum / self.chart.exponent;
        self.profile.check(total)?;
        let ymap = |u: f64| self.phi.d1(u).map(|d| u * d).unwrap_or(f64::NAN);
        let (mut lo, mut hi) = (1.0, 1.0);
        while !(ymap(lo) < total) {
            lo *= 0.5;
            if lo < 1e-300 {
                return Err(GeomError::Domain(format!("y = {total} below the profile range")));
            }
        }
        while !(ymap(hi) > total) {
            hi *= 2.0;
            if hi > 1e300 {
                return Err(GeomError::Domain(format!("y = {total} above the profile range")));
            }
        }
        let u = invert_monotone(ymap, total, lo, hi, 1e-15 * (1.0 + total.abs()))?;
        let mut r2 = vec![0.0; self.dim()];
        let mut base = 1.0;
        for g in &self.chart.bases {
            // y_k + a = (a + y)|ζ_k|²/(1+S) summed over the group
            let part: f64 = g.indices.iter().map(|&k| y[k] + g.coeff).sum();
            let frac = part / (g.coeff + total);
            if !(0.0..1.0).contains(&frac) {
                return Err(GeomError::Boundary(format!("base moment fraction {frac} outside [0, 1)")));
            }
            let one_plus = 1.0 / (1.0 - frac);
            for &k in &g.indices {
                r2[k] = (y[k] + g.coeff) * one_plus / (g.coeff + total);
            }
            base *= one_plus;
        }
        let nf = (u / base).powf(1.0 / self.chart.exponent);
        for &k in &self.chart.fiber {
            r2[k] = y[k] * nf / (self.chart.exponent * total);
        }
        if let Some(v) = r2.iter().find(|v| !(**v >= 0.0)) {
            return Err(GeomError::Boundary(format!("squared radius {v} < 0")));
        }
        Ok(r2.into_iter().map(f64::sqrt).collect())
    }

    /// A chart point with base radii log-uniform in `[0.2, 3]`, angles
    /// uniform and `u` log-uniform in `[u_lo, u_hi]`.
    pub fn sample_point(&self, rng: &mut impl Rng, u_lo: f64, u_hi: f64) -> Vec<C64> {
        let mut z: Vec<C64> = (0..self.dim())
            .map(|_| {
                C64::from_polar((rng.gen_range(0.2f64..3.0).ln()).exp(), rng.gen_range(0.0..std::f64::consts::TAU))
            })
            .collect();
        for &k in &self.chart.fiber {
            z[k] = C64::from_polar(rng.gen_range(0.3..1.0), rng.gen_range(0.0..std::f64::consts::TAU));
        }
        let target = (rng.gen_range(u_lo.ln()..u_hi.ln())).exp();
        let s = (target / self.u(&z)).powf(0.5 / self.chart.exponent);
        for &k in &self.chart.fiber {
            z[k] *= s;
        }
        z
    }
}

/// The family metric at a chart point, checked positive definite.
pub fn family_metric(f: &AnsatzFamily, z: &[C64]) -> Result<HermitianForm> {
    let h = f.hermitian(z)?;
    let min = hermitian_eigenvalues(&h).into_iter().fold(f64::INFINITY, f64::min);
    if !(min > 0.0) {
        return Err(GeomError::NotPositive { eigenvalue: min });
    }
    Ok(h)
}

/// Moment coordinates at the point with radii `r` (angles irrelevant).
pub fn family_moment(f: &AnsatzFamily, r: &[f64]) -> Result<Vec<f64>> {
    f.moment(&f.point(r, &vec![0.0; r.len()]))
}

/// The profile of a Ricci-flat cubic family.
pub fn cubic_profile(kind: FamilyKind) -> Result<CubicProfile> {
    match kind {
        FamilyKind::Resolved3 { a } => CubicProfile::new(a, 0.0, 2),
        FamilyKind::KrfK3 => CubicProfile::new(0.0, 0.0, 2),
        FamilyKind::P1p1 { a1, a2 } | FamilyKind::O22 { a1, a2 } => CubicProfile::new(a1, a2, 1),
        other => Err(GeomError::Config(format!("{} has no cubic profile", other.name()))),
    }
}
