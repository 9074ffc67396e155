use std::f64::consts::TAU;
use std::sync::Arc;

use kepler_geom::numkit::RMatrix;
use kepler_geom::toric_hessian::{
    csc_profile, einstein_profile, legendre_dual, metric_g, one_zero_form_defect, point_from_moment, ricci_curl,
    ricci_symplectic, scalar_curvature, symplectic_components, un_potential, un_ricci_fd, BProfile, HessianPotential,
    LegendreDual, UProfile,
};
use kepler_geom::Result;
use rand::Rng;

use super::{uniform, worst, Check, Rng64};

type Profiles = Vec<(Arc<dyn UProfile>, Option<f64>)>;

/// Profile and, when it is Einstein, its constant `λ`.
fn profiles() -> Result<Profiles> {
    Ok(vec![
        (Arc::new(BProfile::new(2, 0.0)?), Some(0.0)),
        (Arc::new(BProfile::new(2, 1.0)?), Some(0.0)),
        (Arc::new(BProfile::new(3, 0.7)?), Some(0.0)),
        (Arc::new(einstein_profile(2, 1.5, 1.0, (0.2, 2.0))?), Some(1.5)),
        (Arc::new(einstein_profile(3, 2.0, 1.0, (0.2, 2.0))?), Some(2.0)),
        (Arc::new(csc_profile(3, 0.7, 0.3, 0.5, (0.2, 2.0))?), None),
    ])
}

/// Runs `f` on sample `k` with profile `k mod 6`.
fn over_profiles(
    r: &mut Rng64,
    samples: usize,
    mut f: impl FnMut(&Arc<dyn UProfile>, Option<f64>, &mut Rng64) -> Result<f64>,
) -> Result<f64> {
    let ps = profiles()?;
    worst(samples, |k| {
        let (p, lam) = &ps[k % ps.len()];
        f(p, *lam, r)
    })
}

/// Moment point with total at least a tenth of the interval away from its
/// ends: the finite-difference routes lose digits where `u → 0`.
fn point(p: &dyn UProfile, r: &mut Rng64) -> Vec<f64> {
    let (lo, hi) = p.domain();
    let top = hi.min(3.0);
    let m = 0.1 * (top - lo);
    let total = r.gen_range(lo + m..top - m);
    let w = uniform(p.n(), r, 0.2, 1.0);
    let s: f64 = w.iter().sum();
    w.iter().map(|v| total * v / s).collect()
}

fn angles(n: usize, r: &mut Rng64) -> Vec<f64> {
    uniform(n, r, 0.0, TAU)
}

fn g_inverse(r: &mut Rng64, samples: usize) -> Result<f64> {
    over_profiles(r, samples, |p, _, r| {
        let (lo, up) = metric_g(p.as_ref(), &point(p.as_ref(), r))?;
        Ok(lo.matmul(&up).sub(&RMatrix::identity(p.n())).max_abs())
    })
}

fn potential_hessian(r: &mut Rng64, samples: usize) -> Result<f64> {
    over_profiles(r, samples, |p, _, r| {
        let y = point(p.as_ref(), r);
        let (lo, _) = metric_g(p.as_ref(), &y)?;
        Ok(un_potential(p.clone()).hessian(&y)?.sub(&lo).max_abs() / (1.0 + lo.max_abs()))
    })
}

fn abreu(r: &mut Rng64, samples: usize) -> Result<f64> {
    over_profiles(r, samples, |p, _, r| {
        let s = scalar_curvature(p.as_ref(), &point(p.as_ref(), r))?;
        Ok((s.closed - s.abreu).abs())
    })
}

fn logdet(r: &mut Rng64, samples: usize) -> Result<f64> {
    over_profiles(r, samples, |p, _, r| {
        let s = scalar_curvature(p.as_ref(), &point(p.as_ref(), r))?;
        Ok((s.closed - p.n() as f64 * s.logdet).abs())
    })
}

/// `R = nλ` for Einstein profiles, zero on the b-family.
fn einstein_value(r: &mut Rng64, samples: usize) -> Result<f64> {
    let ps: Vec<_> = profiles()?.into_iter().filter(|(_, l)| l.is_some()).collect();
    worst(samples, |k| {
        let (p, lam) = &ps[k % ps.len()];
        let target = p.n() as f64 * lam.unwrap_or(0.0);
        let s = scalar_curvature(p.as_ref(), &point(p.as_ref(), r))?;
        Ok((s.closed - target).abs().max((s.abreu - target).abs()))
    })
}

fn one_zero(r: &mut Rng64, samples: usize) -> Result<f64> {
    over_profiles(r, samples, |p, _, r| {
        let y = point(p.as_ref(), r);
        one_zero_form_defect(p.as_ref(), &y, &angles(y.len(), r))
    })
}

fn ricci_pullback(r: &mut Rng64, samples: usize) -> Result<f64> {
    over_profiles(r, samples, |p, _, r| {
        let y = point(p.as_ref(), r);
        let theta = angles(y.len(), r);
        let z = point_from_moment(p.as_ref(), &y, &theta)?;
        let pulled = symplectic_components(p.as_ref(), &un_ricci_fd(p.as_ref(), &z)?, &y, &theta)?;
        Ok(pulled.sub(&ricci_symplectic(p.as_ref(), &y)?.form).max_abs())
    })
}

fn ricci_closed(r: &mut Rng64, samples: usize) -> Result<f64> {
    over_profiles(r, samples, |p, _, r| ricci_curl(p.as_ref(), &point(p.as_ref(), r)))
}

fn double_legendre(r: &mut Rng64, samples: usize) -> Result<f64> {
    over_profiles(r, samples, |p, _, r| {
        let y = point(p.as_ref(), r);
        let psi = un_potential(p.clone());
        let d = legendre_dual(&psi, &y)?;
        // start the inverse search away from the answer
        let start: Vec<f64> = y.iter().map(|v| v * r.gen_range(0.95..1.05)).collect();
        let back = LegendreDual::new(&psi, start).solve(&d.dual_point)?;
        Ok(back.iter().zip(&y).map(|(a, b)| (a - b).abs() / (1.0 + b.abs())).fold(0.0, f64::max))
    })
}

pub fn checks() -> Vec<Check> {
    vec![
        Check {
            id: "tor.g_inverse",
            invariant: "G_ij and G^ij from the profile are mutually inverse",
            tolerance: 1e-9,
            samples: 60,
            run: g_inverse,
        },
        Check {
            id: "tor.potential_hessian",
            invariant: "Hessian of the symplectic potential is G_ij",
            tolerance: 1e-8,
            samples: 60,
            run: potential_hessian,
        },
        Check {
            id: "tor.scalar.abreu",
            invariant: "closed-form scalar curvature equals −Σ∂ᵢ∂ⱼG^ij",
            tolerance: 1e-4,
            samples: 60,
            run: abreu,
        },
        Check {
            id: "tor.scalar.logdet",
            invariant: "closed-form scalar curvature equals n times the log-det route",
            tolerance: 1e-4,
            samples: 60,
            run: logdet,
        },
        Check {
            id: "tor.scalar.einstein",
            invariant: "R = nλ on Einstein profiles and R = 0 on the b-family",
            tolerance: 1e-4,
            samples: 50,
            run: einstein_value,
        },
        Check {
            id: "tor.ricci.pullback",
            invariant: "Ricci form by finite differences matches its symplectic-coordinate formula",
            tolerance: 1e-5,
            samples: 12,
            run: ricci_pullback,
        },
        Check {
            id: "tor.ricci.closed",
            invariant: "Ricci form in symplectic coordinates is closed",
            tolerance: 1e-6,
            samples: 30,
            run: ricci_closed,
        },
        Check {
            id: "tor.one_zero_form",
            invariant: "dzᵢ/zᵢ = ½ΣG_ij dyⱼ + i dθᵢ",
            tolerance: 1e-6,
            samples: 30,
            run: one_zero,
        },
        Check {
            id: "tor.legendre.double",
            invariant: "Legendre transform of the symplectic potential is an involution",
            tolerance: 1e-9,
            samples: 30,
            run: double_legendre,
        },
    ]
}
