use std::f64::consts::TAU;

use kepler_geom::calabi_families::{
    dual_potential_expected, eh_polar_metric, eh_pushforward, family_g, family_psi, moment_polytope, p1p1_polar_metric,
    p1p1_pushforward, AngleMap, AnsatzFamily, FamilyKind,
};
use kepler_geom::numkit::{fd_ddbar, fd_hessian, RMatrix};
use kepler_geom::toric_hessian::{legendre_dual, HessianPotential, LegendreDual};
use kepler_geom::Result;
use rand::Rng;

use super::{worst, Check, Rng64};

pub(crate) fn all_kinds() -> Vec<FamilyKind> {
    use FamilyKind::*;
    vec![
        UnRf { n: 2, b: 1.0 },
        UnRf { n: 3, b: 0.7 },
        UnRf { n: 2, b: 0.0 },
        QuotientOn { n: 2, b: 1.0 },
        QuotientOn { n: 3, b: 0.8 },
        Eh { a: 0.5, c1: 1.0, c2: 1.0 },
        Eh { a: 0.0, c1: 2.0, c2: 0.5 },
        Resolved3 { a: 1.0 },
        KeplerK3Lift,
        KrfK3,
        P1p1 { a1: 0.0, a2: 0.0 },
        P1p1 { a1: 1.0, a2: 0.0 },
        P1p1 { a1: 1.0, a2: 1.0 },
        P1p1 { a1: 0.5, a2: 2.0 },
        O22 { a1: 1.0, a2: 1.0 },
        O22 { a1: 0.5, a2: 2.0 },
    ]
}

/// Runs `f` on sample `k` with family `k mod 16`, optionally restricted.
fn over_families(
    r: &mut Rng64,
    samples: usize,
    keep: fn(&FamilyKind) -> bool,
    mut f: impl FnMut(&AnsatzFamily, &mut Rng64) -> Result<f64>,
) -> Result<f64> {
    let fams = all_kinds().into_iter().filter(keep).map(AnsatzFamily::new).collect::<Result<Vec<_>>>()?;
    worst(samples, |k| f(&fams[k % fams.len()], r))
}

fn any(_: &FamilyKind) -> bool {
    true
}

fn rmax(a: &RMatrix, b: &RMatrix) -> f64 {
    a.sub(b).max_abs()
}

fn interior_moment(f: &AnsatzFamily, r: &mut Rng64) -> Result<Vec<f64>> {
    f.moment(&f.sample_point(r, 0.2, 5.0))
}

fn metric_potential(r: &mut Rng64, samples: usize) -> Result<f64> {
    over_families(r, samples, any, |f, r| {
        let z = f.sample_point(r, 0.5, 5.0);
        let h = f.hermitian(&z)?;
        let step = 2e-3 * z.iter().map(|w| w.norm()).fold(1.0, f64::min);
        let fd = fd_ddbar(|v| f.potential(v).unwrap_or(f64::NAN), &z, Some(step))?;
        Ok(h.sub(&fd).max_abs() / (1.0 + h.max_abs()))
    })
}

fn g_inverse(r: &mut Rng64, samples: usize) -> Result<f64> {
    over_families(r, samples, any, |f, r| {
        let (lo, up) = family_g(f, &interior_moment(f, r)?)?;
        Ok(rmax(&lo.matmul(&up), &RMatrix::identity(f.dim())))
    })
}

fn psi_analytic(r: &mut Rng64, samples: usize) -> Result<f64> {
    over_families(r, samples, any, |f, r| {
        let y = interior_moment(f, r)?;
        let (g, _) = family_g(f, &y)?;
        Ok(rmax(&family_psi(f)?.hessian(&y)?, &g) / (1.0 + g.max_abs()))
    })
}

fn psi_fd(r: &mut Rng64, samples: usize) -> Result<f64> {
    over_families(r, samples, any, |f, r| {
        let y = interior_moment(f, r)?;
        let (g, _) = family_g(f, &y)?;
        let psi = family_psi(f)?;
        let room = moment_polytope(f.kind).slack(&y).min(1.0);
        let fd = fd_hessian(|v| psi.value(v).unwrap_or(f64::NAN), &y, Some(3e-3 * room))?;
        Ok(rmax(&fd, &g) / (1.0 + g.max_abs()))
    })
}

/// `(relative Legendre round trip, relative Hess ψ^∨ − G^ij, relative ψ^∨ error)`.
fn dual_parts(f: &AnsatzFamily, r: &mut Rng64) -> Result<[f64; 3]> {
    let y = interior_moment(f, r)?;
    let (_, up) = family_g(f, &y)?;
    let psi = family_psi(f)?;
    let d = legendre_dual(&psi, &y)?;
    let dual = LegendreDual::new(&psi, y.clone());
    let back = dual.solve(&d.dual_point)?;
    let trip = back.iter().zip(&y).map(|(a, b)| (a - b).abs() / (1.0 + b.abs())).fold(0.0, f64::max);
    let fd = fd_hessian(|x| dual.value(x).unwrap_or(f64::NAN), &d.dual_point, Some(2e-3))?;
    let expect = dual_potential_expected(f, &y)?;
    Ok([trip, rmax(&fd, &up) / (1.0 + up.max_abs()), (d.value - expect).abs() / (1.0 + expect.abs())])
}

fn ricci_flat(r: &mut Rng64, samples: usize) -> Result<f64> {
    over_families(r, samples, FamilyKind::ricci_flat, |f, r| {
        Ok(f.ricci_fd(&f.sample_point(r, 0.3, 4.0), None)?.max_abs())
    })
}

/// `max(0, −min slack)` over moment images of points across many scales.
fn polytope(r: &mut Rng64, samples: usize) -> Result<f64> {
    over_families(r, samples, any, |f, r| {
        let d = moment_polytope(f.kind);
        let mut low = f64::INFINITY;
        for _ in 0..50 {
            low = low.min(d.slack(&f.moment(&f.sample_point(r, 1e-3, 1e3))?));
        }
        Ok((-low).max(0.0))
    })
}

fn inverse_moment(r: &mut Rng64, samples: usize) -> Result<f64> {
    over_families(r, samples, any, |f, r| {
        let z = f.sample_point(r, 0.05, 20.0);
        let back = f.inverse_moment(&f.moment(&z)?)?;
        Ok(z.iter().zip(&back).map(|(w, b)| (w.norm() - b).abs() / (1.0 + w.norm())).fold(0.0, f64::max))
    })
}

fn eh_polar(r: &mut Rng64, samples: usize) -> Result<f64> {
    let b = 1.1;
    let f = AnsatzFamily::new(FamilyKind::Eh { a: 0.6, c1: 1.0, c2: b * b })?;
    worst(samples, |_| {
        let s = b.sqrt() * r.gen_range(1.05..3.0);
        let coords = [s, r.gen_range(0.2..2.9), r.gen_range(0.0..TAU), r.gen_range(0.0..TAU)];
        let g = eh_polar_metric(b, coords[0], coords[1], coords[2], coords[3])?;
        Ok(rmax(&g, &eh_pushforward(&f, &coords, AngleMap::Derived)?) / (1.0 + g.max_abs()))
    })
}

fn p1p1_polar(r: &mut Rng64, samples: usize) -> Result<f64> {
    let fams = [(0.7, 1.3), (1.0, 1.0), (0.0, 0.0)]
        .into_iter()
        .map(|(a1, a2)| AnsatzFamily::new(FamilyKind::P1p1 { a1, a2 }).map(|f| (a1, a2, f)))
        .collect::<Result<Vec<_>>>()?;
    worst(samples, |k| {
        let (a1, a2, f) = &fams[k % fams.len()];
        let coords = [
            r.gen_range(0.3..2.5),
            r.gen_range(0.2..2.9),
            r.gen_range(0.0..6.2),
            r.gen_range(0.2..2.9),
            r.gen_range(0.0..6.2),
            r.gen_range(0.0..6.2),
        ];
        let g = p1p1_polar_metric(*a1, *a2, f.profile.as_ref(), &coords)?;
        Ok(rmax(&g, &p1p1_pushforward(f, &coords, AngleMap::Derived)?) / (1.0 + g.max_abs()))
    })
}

pub fn checks() -> Vec<Check> {
    vec![
        Check {
            id: "fam.metric_potential",
            invariant: "family Hermitian form equals the finite-difference ∂∂̄ of φ(u)",
            tolerance: 1e-7,
            samples: 48,
            run: metric_potential,
        },
        Check {
            id: "fam.g_inverse",
            invariant: "G_ij and G^ij of each family are mutually inverse",
            tolerance: 1e-9,
            samples: 160,
            run: g_inverse,
        },
        Check {
            id: "fam.psi_closed_form",
            invariant: "Hessian of Σcᵢlᵢ(ln lᵢ − 1) equals G_ij",
            tolerance: 1e-8,
            samples: 160,
            run: psi_analytic,
        },
        Check {
            id: "fam.psi_fd",
            invariant: "finite-difference Hessian of ψ equals G_ij",
            tolerance: 1e-7,
            samples: 160,
            run: psi_fd,
        },
        Check {
            id: "fam.legendre.double",
            invariant: "Legendre transform of ψ is an involution",
            tolerance: 1e-9,
            samples: 80,
            run: |r, n| over_families(r, n, any, |f, r| Ok(dual_parts(f, r)?[0])),
        },
        Check {
            id: "fam.legendre.dual_hessian",
            invariant: "Hessian of the Legendre dual ψ^∨ equals G^ij",
            tolerance: 1e-7,
            samples: 80,
            run: |r, n| over_families(r, n, any, |f, r| Ok(dual_parts(f, r)?[1])),
        },
        Check {
            id: "fam.legendre.dual_potential",
            invariant: "ψ^∨ equals the Kähler potential plus the stated logarithmic terms",
            tolerance: 1e-8,
            samples: 80,
            run: |r, n| over_families(r, n, any, |f, r| Ok(dual_parts(f, r)?[2])),
        },
        Check {
            id: "fam.ricci_flat",
            invariant: "Ricci-flat families have vanishing Ricci form",
            tolerance: 1e-5,
            samples: 56,
            run: ricci_flat,
        },
        Check {
            id: "fam.polytope",
            invariant: "moment images satisfy every defining inequality of the polytope",
            tolerance: 1e-9,
            samples: 160,
            run: polytope,
        },
        Check {
            id: "fam.inverse_moment",
            invariant: "closed-form inverse moment map recovers the radii",
            tolerance: 1e-8,
            samples: 160,
            run: inverse_moment,
        },
        Check {
            id: "fam.eh_polar",
            invariant: "Eguchi–Hanson polar form under ψ = −2β − φ",
            tolerance: 1e-6,
            samples: 50,
            run: eh_polar,
        },
        Check {
            id: "fam.p1p1_polar",
            invariant: "P¹×P¹ polar form under ψ = −2β − φ₁ − φ₂",
            tolerance: 1e-6,
            samples: 45,
            run: p1p1_polar,
        },
    ]
}
