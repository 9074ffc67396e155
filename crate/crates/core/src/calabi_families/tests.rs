use std::sync::Arc;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::numkit::{fd_ddbar, fd_hessian, mat_inverse, CMatrix, RMatrix};
use crate::toric_hessian::{legendre_dual, HessianPotential, LegendreDual};

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn kinds() -> Vec<FamilyKind> {
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

fn families() -> Vec<AnsatzFamily> {
    kinds().into_iter().map(|k| AnsatzFamily::new(k).unwrap()).collect()
}

fn cmax(a: &CMatrix, b: &CMatrix) -> f64 {
    a.sub(b).max_abs()
}

fn rmax(a: &RMatrix, b: &RMatrix) -> f64 {
    a.sub(b).max_abs()
}

/// `JᵀH J̄` for a holomorphic Jacobian `J[a][i] = ∂q_a/∂z_i`.
fn pull(h: &CMatrix, jac: &[Vec<C64>]) -> CMatrix {
    let n = jac[0].len();
    CMatrix::from_fn(n, |i, j| {
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..jac.len() {
            for b in 0..jac.len() {
                acc += jac[a][i] * h[(a, b)] * jac[b][j].conj();
            }
        }
        acc
    })
}

fn interior_moment(f: &AnsatzFamily, r: &mut ChaCha8Rng) -> (Vec<C64>, Vec<f64>) {
    let z = f.sample_point(r, 0.2, 5.0);
    let y = f.moment(&z).unwrap();
    (z, y)
}

#[test]
fn family_metric_matches_potential() {
    let mut r = rng(1);
    for f in families() {
        for _ in 0..6 {
            let z = f.sample_point(&mut r, 0.5, 5.0);
            let h = family_metric(&f, &z).unwrap();
            let step = 2e-3 * z.iter().map(|w| w.norm()).fold(1.0, f64::min);
            let fd = fd_ddbar(|v| f.potential(v).unwrap_or(f64::NAN), &z, Some(step)).unwrap();
            let err = cmax(&h, &fd) / (1.0 + h.max_abs());
            assert!(err < 1e-7, "{:?}: {err:e}", f.kind);
        }
    }
}

#[test]
fn flat_and_degenerate_cases() {
    let f = AnsatzFamily::new(FamilyKind::UnRf { n: 3, b: 0.0 }).unwrap();
    let z = [c(0.3, 0.1), c(-0.5, 0.7), c(1.1, 0.0)];
    assert!(cmax(&family_metric(&f, &z).unwrap(), &CMatrix::identity(3)) < 1e-14);
    let eh = AnsatzFamily::new(FamilyKind::Eh { a: 0.5, c1: 1.0, c2: 1.0 }).unwrap();
    assert!(matches!(family_metric(&eh, &[c(0.2, 0.0), c(0.0, 0.0)]), Err(GeomError::Chart(_))));
    assert!(AnsatzFamily::new(FamilyKind::Resolved3 { a: -1.0 }).is_err());
    assert!(AnsatzFamily::new(FamilyKind::O22 { a1: 1.0, a2: 0.0 }).is_err());
    assert!(matches!(blowdown_o22(0.0, 1.0, &[c(0.1, 0.0), c(0.2, 0.0), c(0.3, 0.0)]), Err(GeomError::Config(_))));
}

/// The displayed `O(−1)` form: `(a + y + u|z|²y′)/(1+|z|²)²`, `y′z̄w`, `y′(1+|z|²)`.
#[test]
fn eh_matches_display() {
    let mut r = rng(2);
    for kind in [FamilyKind::Eh { a: 0.0, c1: 1.0, c2: 1.0 }, FamilyKind::Eh { a: 0.7, c1: 1.5, c2: 0.3 }] {
        let f = AnsatzFamily::new(kind).unwrap();
        let FamilyKind::Eh { a, c1, c2 } = kind else { unreachable!() };
        for _ in 0..10 {
            let z = f.sample_point(&mut r, 0.1, 10.0);
            let u = f.u(&z);
            let y = -a + (c1 * u * u + c2).sqrt();
            let y1 = c1 * u / (c1 * u * u + c2).sqrt();
            let s = 1.0 + z[0].norm_sqr();
            let mut disp = CMatrix::zeros(2);
            disp[(0, 0)] = c((a + y + u * z[0].norm_sqr() * y1) / (s * s), 0.0);
            disp[(0, 1)] = z[0].conj() * z[1] * y1;
            disp[(1, 0)] = disp[(0, 1)].conj();
            disp[(1, 1)] = c(y1 * s, 0.0);
            assert!(cmax(&family_metric(&f, &z).unwrap(), &disp) < 1e-12);
        }
    }
    // at z = 0 with a = 0: diag(y, y′)
    let f = AnsatzFamily::new(FamilyKind::Eh { a: 0.0, c1: 1.0, c2: 4.0 }).unwrap();
    let h = family_metric(&f, &[c(0.0, 0.0), c(1.5, 0.0)]).unwrap();
    let u: f64 = 2.25;
    let y = (u * u + 4.0).sqrt();
    assert!((h[(0, 0)].re - y).abs() < 1e-13 && (h[(1, 1)].re - u / y).abs() < 1e-13);
    assert!(h[(0, 1)].norm() < 1e-15);
}

/// `O(−1,−1)` display entries.
#[test]
fn p1p1_matches_display() {
    let mut r = rng(3);
    for (a1, a2) in [(1.0, 1.0), (0.5, 2.0), (0.0, 0.0)] {
        let f = AnsatzFamily::new(FamilyKind::P1p1 { a1, a2 }).unwrap();
        for _ in 0..10 {
            let z = f.sample_point(&mut r, 0.1, 10.0);
            let u = f.u(&z);
            let d1 = f.phi().d1(u).unwrap();
            let d2 = f.phi().d2(u).unwrap();
            let s = [1.0 + z[0].norm_sqr(), 1.0 + z[1].norm_sqr()];
            let a = [a1, a2];
            let w = z[2];
            let h = family_metric(&f, &z).unwrap();
            for j in 0..2 {
                let jj = (a[j] + u * d1 * s[j] + u * u * d2 * z[j].norm_sqr()) / (s[j] * s[j]);
                assert!((h[(j, j)].re - jj).abs() < 1e-11 * (1.0 + jj));
                let jw = w * z[j].conj() * (s[1 - j] * (d1 + u * d2));
                assert!((h[(j, 2)] - jw).norm() < 1e-11 * (1.0 + jw.norm()));
            }
            let off = z[0].conj() * z[1] * (w.norm_sqr() * (d1 + u * d2));
            assert!((h[(0, 1)] - off).norm() < 1e-11);
            let ww = (d1 + u * d2) * u / w.norm_sqr();
            assert!((h[(2, 2)].re - ww).abs() < 1e-11 * ww);
        }
    }
}

/// `z = z₁, w₁ = w, w₂ = wz₂` carries the P¹×P¹ chart with `a₂ = 0` onto
/// the resolved chart.
#[test]
fn p1p1_with_a2_zero_blows_down() {
    let mut r = rng(4);
    for (a, target) in [(0.0, FamilyKind::KrfK3), (1.3, FamilyKind::Resolved3 { a: 1.3 })] {
        let p = AnsatzFamily::new(FamilyKind::P1p1 { a1: a, a2: 0.0 }).unwrap();
        let q = AnsatzFamily::new(target).unwrap();
        for _ in 0..10 {
            let z = p.sample_point(&mut r, 0.1, 10.0);
            let img = [z[0], z[2], z[2] * z[1]];
            let zero = c(0.0, 0.0);
            let one = c(1.0, 0.0);
            let jac = vec![vec![one, zero, zero], vec![zero, zero, one], vec![zero, z[2], z[1]]];
            let lhs = family_metric(&p, &z).unwrap();
            let rhs = pull(&family_metric(&q, &img).unwrap(), &jac);
            assert!(cmax(&lhs, &rhs) < 1e-11 * (1.0 + lhs.max_abs()), "{a}");
            assert!((p.u(&z) - q.u(&img)).abs() < 1e-12 * p.u(&z));
        }
    }
}

#[test]
fn quotient_chart() {
    let mut r = rng(5);
    for (n, b) in [(2, 1.0), (3, 0.8), (3, 0.0), (4, 1.2)] {
        let un = AnsatzFamily::new(FamilyKind::UnRf { n, b }).unwrap();
        let qf = AnsatzFamily::new(FamilyKind::QuotientOn { n, b }).unwrap();
        for _ in 0..8 {
            let z = un.sample_point(&mut r, 0.2, 5.0);
            let q = quotient_map(n, &z).unwrap();
            let hq = family_metric(&qf, &q).unwrap();
            assert!(cmax(&hq, &quotient_display(n, b, &q)) < 1e-7 * (1.0 + hq.max_abs()), "n={n} b={b}");
            // J[a][i] = ∂q_a/∂z_i
            let nf = n as u32;
            let jac: Vec<Vec<C64>> = (0..n)
                .map(|a| {
                    (0..n)
                        .map(|i| match (a, i) {
                            (0, 0) => z[0].powu(nf - 1) * n as f64,
                            (0, _) => c(0.0, 0.0),
                            (a, 0) => -z[a] / (z[0] * z[0]),
                            (a, i) if a == i => 1.0 / z[0],
                            _ => c(0.0, 0.0),
                        })
                        .collect()
                })
                .collect();
            let lhs = family_metric(&un, &z).unwrap();
            assert!(cmax(&lhs, &pull(&hq, &jac)) < 1e-10 * (1.0 + lhs.max_abs()));
        }
    }
    assert!(matches!(quotient_map(2, &[c(0.0, 0.0), c(1.0, 0.0)]), Err(GeomError::Chart(_))));
    // the b > 0 quotient extends over v = 0
    let qf = AnsatzFamily::new(FamilyKind::QuotientOn { n: 3, b: 1.0 }).unwrap();
    let h = quotient_display(3, 1.0, &[c(0.0, 0.0), c(0.4, 0.2), c(-0.3, 0.5)]);
    assert!(crate::numkit::hermitian_eigenvalues(&h).iter().all(|e| *e > 0.0));
    let q = [c(1e-5, 0.0), c(0.4, 0.2), c(-0.3, 0.5)];
    let near = family_metric(&qf, &q).unwrap();
    // y³ − b³ loses about ten digits at |v| = 1e-5
    assert!(cmax(&near, &quotient_display(3, 1.0, &q)) < 1e-5);
    assert!(cmax(&near, &h) < 1e-3);
}

/// The n = 2 quotient through `v = w²`, `w₂ = z` is the `a = 0` Eguchi–Hanson chart.
#[test]
fn quotient_two_is_eguchi_hanson() {
    let mut r = rng(6);
    let b: f64 = 0.9;
    let qf = AnsatzFamily::new(FamilyKind::QuotientOn { n: 2, b }).unwrap();
    let eh = AnsatzFamily::new(FamilyKind::Eh { a: 0.0, c1: 1.0, c2: b * b }).unwrap();
    for _ in 0..10 {
        let z = eh.sample_point(&mut r, 0.1, 10.0);
        let q = [z[1] * z[1], z[0]];
        let jac = vec![vec![c(0.0, 0.0), z[1] * 2.0], vec![c(1.0, 0.0), c(0.0, 0.0)]];
        let lhs = family_metric(&eh, &z).unwrap();
        assert!(cmax(&lhs, &pull(&family_metric(&qf, &q).unwrap(), &jac)) < 1e-11 * (1.0 + lhs.max_abs()));
        let s = 1.0 + z[0].norm_sqr();
        let vv = s * s / (4.0 * (q[0].norm_sqr() * s * s + b * b).sqrt());
        assert!((quotient_display(2, b, &q)[(0, 0)].re - vv).abs() < 1e-13);
    }
}

#[test]
fn moment_formulas() {
    let mut r = rng(7);
    let a = 0.8;
    let f = AnsatzFamily::new(FamilyKind::Resolved3 { a }).unwrap();
    for _ in 0..10 {
        let rad: Vec<f64> = (0..3).map(|_| r.gen_range(0.2..2.0)).collect();
        let y = family_moment(&f, &rad).unwrap();
        let u = (rad[1] * rad[1] + rad[2] * rad[2]) * (1.0 + rad[0] * rad[0]);
        let d1 = f.phi().d1(u).unwrap();
        let r0 = rad[0] * rad[0];
        assert!((y[0] - (-a / (1.0 + r0) + r0 * (rad[1].powi(2) + rad[2].powi(2)) * d1)).abs() < 1e-13);
        for j in 1..3 {
            assert!((y[j] - rad[j].powi(2) * (1.0 + r0) * d1).abs() < 1e-13);
        }
    }
    assert!((family_moment(&f, &[0.0, 0.7, 0.4]).unwrap()[0] + a).abs() < 1e-15);

    let (a1, a2) = (0.6, 1.4);
    let f = AnsatzFamily::new(FamilyKind::P1p1 { a1, a2 }).unwrap();
    for _ in 0..10 {
        let rad: Vec<f64> = (0..3).map(|_| r.gen_range(0.2..2.0)).collect();
        let y = family_moment(&f, &rad).unwrap();
        let sq: Vec<f64> = rad.iter().map(|v| v * v).collect();
        let u = sq[2] * (1.0 + sq[0]) * (1.0 + sq[1]);
        let d1 = f.phi().d1(u).unwrap();
        let a = [a1, a2];
        for j in 0..2 {
            let expect = -a[j] / (1.0 + sq[j]) + sq[j] * sq[2] * (1.0 + sq[1 - j]) * d1;
            assert!((y[j] - expect).abs() < 1e-13);
        }
        assert!((y[2] - u * d1).abs() < 1e-13);
    }

    // y = ½u^{1/2} for the Kepler lift
    let f = AnsatzFamily::new(FamilyKind::KeplerK3Lift).unwrap();
    let y = family_moment(&f, &[0.7, 1.2, 0.5]).unwrap();
    let u = (1.44 + 0.25) * 1.49;
    assert!((y[1] + y[2] - 0.5 * f64::sqrt(u)).abs() < 1e-14);
}

#[test]
fn inverse_moment_round_trips() {
    let mut r = rng(8);
    for f in families() {
        for _ in 0..20 {
            let z = f.sample_point(&mut r, 0.05, 20.0);
            let rad: Vec<f64> = z.iter().map(|w| w.norm()).collect();
            let back = f.inverse_moment(&f.moment(&z).unwrap()).unwrap();
            for (x, y) in rad.iter().zip(&back) {
                assert!((x - y).abs() < 1e-8 * (1.0 + x), "{:?}: {x} vs {y}", f.kind);
            }
        }
    }
}

/// Which of the closed-form inverse radii hold.
#[test]
fn printed_inverse_radii() {
    let mut r = rng(9);
    let kepler = AnsatzFamily::new(FamilyKind::KeplerK3Lift).unwrap();
    let krf = AnsatzFamily::new(FamilyKind::KrfK3).unwrap();
    let a = 0.9;
    let res = AnsatzFamily::new(FamilyKind::Resolved3 { a }).unwrap();
    let (a1, a2) = (0.7, 1.6);
    let pp = AnsatzFamily::new(FamilyKind::P1p1 { a1, a2 }).unwrap();
    let mut quarter_gap = 0.0f64;
    for _ in 0..20 {
        let (z, y) = interior_moment(&kepler, &mut r);
        let tot = y[1] + y[2];
        assert!((z[0].norm() - (y[0] / (tot - y[0])).sqrt()).abs() < 1e-10);
        for j in 1..3 {
            assert!((z[j].norm() - 2.0 * (y[j] * (tot - y[0])).sqrt()).abs() < 1e-10);
        }
        let u = kepler.u(&z);
        assert!((u - 4.0 * tot * tot).abs() < 1e-12 * u);
        quarter_gap = quarter_gap.max((u - 0.25 * tot * tot).abs() / u);

        let (z, y) = interior_moment(&krf, &mut r);
        let tot = y[1] + y[2];
        for j in 1..3 {
            assert!((z[j].norm() - (y[j] * (tot - y[0]) / tot.sqrt()).sqrt()).abs() < 1e-10);
        }

        let (z, y) = interior_moment(&res, &mut r);
        let tot = y[1] + y[2];
        let d1 = res.phi().d1(res.u(&z)).unwrap();
        assert!((z[0].norm() - ((y[0] + a) / (tot - y[0])).sqrt()).abs() < 1e-10);
        for j in 1..3 {
            assert!((z[j].norm() - (y[j] * (tot - y[0]) / (d1 * (tot + a))).sqrt()).abs() < 1e-10);
        }

        let (z, y) = interior_moment(&pp, &mut r);
        let d1 = pp.phi().d1(pp.u(&z)).unwrap();
        let am = [a1, a2];
        for j in 0..2 {
            assert!((z[j].norm() - ((y[j] + am[j]) / (y[2] - y[j])).sqrt()).abs() < 1e-10);
        }
        let r3 = (y[2] * (y[2] - y[0]) * (y[2] - y[1]) / (d1 * (y[2] + a1) * (y[2] + a2))).sqrt();
        assert!((z[2].norm() - r3).abs() < 1e-10);
    }
    // u = ¼y² is off by a factor 16
    assert!(quarter_gap > 0.9);
}

#[test]
fn g_matrices_are_inverse() {
    let mut r = rng(10);
    for f in families() {
        for _ in 0..10 {
            let (_, y) = interior_moment(&f, &mut r);
            let (lo, up) = family_g(&f, &y).unwrap();
            let err = rmax(&lo.matmul(&up), &RMatrix::identity(f.dim()));
            assert!(err < 1e-9, "{:?}: {err:e}", f.kind);
        }
    }
    let f = AnsatzFamily::new(FamilyKind::P1p1 { a1: 0.4, a2: 1.1 }).unwrap();
    let (_, y) = interior_moment(&f, &mut r);
    let (g, _) = family_g(&f, &y).unwrap();
    assert_eq!(g[(0, 1)], 0.0);
    assert_eq!(g[(1, 0)], 0.0);
    let f = AnsatzFamily::new(FamilyKind::Resolved3 { a: 1.0 }).unwrap();
    assert!(matches!(family_g(&f, &[-1.5, 0.3, 0.3]), Err(GeomError::Boundary(_))));
}

/// `G^{ij} = Re(ζᵢH_{iȷ̄}ζ̄ⱼ)`, the torus Gram matrix, independently of the closed forms.
#[test]
fn g_upper_is_torus_gram() {
    let mut r = rng(11);
    for f in families() {
        for _ in 0..6 {
            let (z, y) = interior_moment(&f, &mut r);
            let h = family_metric(&f, &z).unwrap();
            let gram = RMatrix::from_fn(f.dim(), |i, j| (z[i] * h[(i, j)] * z[j].conj()).re);
            let (_, up) = family_g(&f, &y).unwrap();
            assert!(rmax(&gram, &up) < 1e-10 * (1.0 + up.max_abs()), "{:?}", f.kind);
        }
    }
}

#[test]
fn psi_hessian_is_g() {
    let mut r = rng(12);
    for f in families() {
        let psi = family_psi(&f).unwrap();
        for _ in 0..6 {
            let (_, y) = interior_moment(&f, &mut r);
            let (g, _) = family_g(&f, &y).unwrap();
            let h = psi.hessian(&y).unwrap();
            assert!(rmax(&g, &h) < 1e-8 * (1.0 + g.max_abs()), "{:?}", f.kind);
            let room = moment_polytope(f.kind).slack(&y).min(1.0);
            let fd = fd_hessian(|v| psi.value(v).unwrap_or(f64::NAN), &y, Some(3e-3 * room)).unwrap();
            assert!(rmax(&g, &fd) < 1e-7 * (1.0 + g.max_abs()), "{:?}: {:e}", f.kind, rmax(&g, &fd));
        }
    }
}

/// `∇ψ = 2 ln r`; the Kepler lift's `ψ` omits the linear term `y ln 4`.
#[test]
fn psi_gradient_is_log_radii() {
    let mut r = rng(13);
    for f in families() {
        let psi = family_psi(&f).unwrap();
        for _ in 0..6 {
            let (z, y) = interior_moment(&f, &mut r);
            let g = psi.gradient(&y).unwrap();
            for k in 0..f.dim() {
                let mut expect = 2.0 * z[k].norm().ln();
                if f.kind == FamilyKind::KeplerK3Lift && k > 0 {
                    expect -= 4f64.ln();
                }
                assert!((g[k] - expect).abs() < 1e-9, "{:?} k={k}: {} vs {expect}", f.kind, g[k]);
            }
        }
    }
}

#[test]
fn legendre_duals() {
    let mut r = rng(14);
    for f in families() {
        let psi = family_psi(&f).unwrap();
        for _ in 0..4 {
            let (_, y) = interior_moment(&f, &mut r);
            let d = legendre_dual(&psi, &y).unwrap();
            let expect = dual_potential_expected(&f, &y).unwrap();
            assert!((d.value - expect).abs() < 1e-8 * (1.0 + expect.abs()), "{:?}: {} vs {expect}", f.kind, d.value);
            let start: Vec<f64> = y.clone();
            let dual = LegendreDual::new(&psi, start);
            let back = dual.solve(&d.dual_point).unwrap();
            assert!(back.iter().zip(&y).all(|(a, b)| (a - b).abs() < 1e-9 * (1.0 + b.abs())));
            let (_, up) = family_g(&f, &y).unwrap();
            let fd = fd_hessian(|x| dual.value(x).unwrap_or(f64::NAN), &d.dual_point, Some(2e-3)).unwrap();
            assert!(rmax(&fd, &up) < 1e-7 * (1.0 + up.max_abs()), "{:?}: {:e}", f.kind, rmax(&fd, &up));
        }
    }
}

/// `ψ^∨ = φ − a ln(r₀²/(1+r₀²))` with `φ` as printed differs from the
/// normalisation `φ = y ln u − ∫ln u` by the constant `3a/4`.
#[test]
fn resolved_dual_constant() {
    let a = 1.2;
    let f = AnsatzFamily::new(FamilyKind::Resolved3 { a }).unwrap();
    let psi = family_psi(&f).unwrap();
    let mut r = rng(15);
    for _ in 0..5 {
        let (z, y) = interior_moment(&f, &mut r);
        let tot = y[1] + y[2];
        let printed = 1.5 * tot - 0.75 * a * (tot + 1.5 * a).ln();
        let r0 = z[0].norm_sqr();
        let dual = legendre_dual(&psi, &y).unwrap().value;
        assert!((dual - (printed - a * (r0 / (1.0 + r0)).ln()) - 0.75 * a).abs() < 1e-10);
    }
}

#[test]
fn ricci_flat_families() {
    let mut r = rng(16);
    for f in families() {
        for _ in 0..4 {
            let z = f.sample_point(&mut r, 0.3, 4.0);
            let ric = f.ricci_fd(&z, None).unwrap();
            if f.kind.ricci_flat() {
                assert!(ric.max_abs() < 1e-5, "{:?}: {:e}", f.kind, ric.max_abs());
            } else {
                // Kepler lift: Ric = ½∂∂̄ ln u
                let step = 2e-3 * z.iter().map(|w| w.norm()).fold(f64::INFINITY, |m, v| m.min(v.max(0.3)));
                let closed = fd_ddbar(|v| 0.5 * f.u(v).ln(), &z, Some(step)).unwrap();
                assert!(cmax(&ric, &closed) < 1e-5);
                assert!(ric.max_abs() > 1e-3);
            }
        }
    }
}

#[test]
fn cubic_profile_ode_and_limits() {
    for (a1, a2) in [(0.0, 0.0), (1.0, 0.0), (0.7, 0.7), (0.5, 2.0), (2.0, 3.0)] {
        let p = CubicProfile::new(a1, a2, 1).unwrap();
        for k in -16..=16 {
            let u = 10f64.powf(k as f64 / 4.0);
            let res = p.ode_residual(u).unwrap();
            assert!(res.abs() < 1e-9 * (1.0 + u), "({a1},{a2}) u={u}: {res:e}");
            let y = p.y_of_u(u).unwrap();
            assert!((p.cubic(y)[0] - u * u).abs() < 1e-12 * u * u);
        }
    }
    let p = cubic_profile(FamilyKind::KrfK3).unwrap();
    for u in [0.01, 1.0, 30.0] {
        assert!((p.y_of_u(u).unwrap() - f64::powf(u, 2.0 / 3.0)).abs() < 1e-13 * u);
    }
    let a: f64 = 0.8;
    let p = cubic_profile(FamilyKind::Resolved3 { a }).unwrap();
    for u in [1e-3, 1e-4] {
        let approx = (2.0 / (3.0 * a)).sqrt() * u - 2.0 * u * u / (9.0 * a * a);
        assert!((p.y_of_u(u).unwrap() - approx).abs() < 10.0 * u * u * u);
    }
    let (a1, a2): (f64, f64) = (0.6, 1.5);
    let p = cubic_profile(FamilyKind::P1p1 { a1, a2 }).unwrap();
    for u in [1e-2, 1e-3] {
        let lead = u * u / (3.0 * a1 * a2);
        let next = lead - (a1 + a2) * u.powi(4) / (18.0 * (a1 * a2).powi(3));
        let y = p.y_of_u(u).unwrap();
        assert!((y - next).abs() < 1e-3 * (lead - next).abs() + 1e-30, "{y} {next}");
    }
    assert!(cubic_profile(FamilyKind::KeplerK3Lift).is_err());
    let e = EhProfile::new(0.4, 1.3, 0.6).unwrap();
    for u in [0.01, 0.5, 3.0, 50.0] {
        assert!(e.ode_residual(u).unwrap().abs() < 1e-12 * (1.0 + u));
    }
}

#[test]
fn beta_root_properties() {
    for a in [0.3, 1.0, 2.5] {
        let [b1, b2] = beta_roots(a, a).unwrap();
        assert!(b1.q != 0.0 && b2.q == -b1.q);
        // sum −3a, product 3a²
        assert!((2.0 * b1.p + 3.0 * a).abs() < 1e-13 * a);
        assert!((b1.p * b1.p + b1.q * b1.q - 3.0 * a * a).abs() < 1e-12 * a * a);
    }
    let [b1, b2] = beta_roots(1.0, 0.0).unwrap();
    assert_eq!(b1.p.min(b2.p), -1.5);
    assert_eq!(b1.p.max(b2.p), 0.0);
    // real pair: Vieta
    let (a1, a2) = (0.5, 2.0);
    let [b1, b2] = beta_roots(a1, a2).unwrap();
    assert!(
        b1.q == 0.0 && (b1.p + b2.p + 1.5 * (a1 + a2)).abs() < 1e-13 && (b1.p * b2.p - 3.0 * a1 * a2).abs() < 1e-12
    );
    // the root formula with "+" on both roots and ½√((3a₁−a₂)(a₁−3a₂)) is not a root
    let printed = -0.75 * (a1 + a2) + 0.5 * ((3.0 * a1 - a2) * (a1 - 3.0 * a2)).sqrt();
    let q = |y: f64| y * y + 1.5 * (a1 + a2) * y + 3.0 * a1 * a2;
    assert!(q(printed).abs() > 0.1);
}

/// `φ = 3y/2 + ½Σβ ln(y − β)` (real form) has `dφ/du = y/u`, and differs
/// from the profile's `y ln u − ∫ln u` by `3(a₁+a₂)/4`.
#[test]
fn cubic_kahler_potential() {
    for (a1, a2) in [(0.8, 0.8), (0.5, 2.0), (1.0, 0.0)] {
        let p = CubicProfile::new(a1, a2, 1).unwrap();
        let phi = |y: f64| -> f64 {
            // complex form with num_complex, to confirm the reality of the sum
            let mut s = C64::new(1.5 * y, 0.0);
            for b in p.beta {
                let beta = C64::new(b.p, b.q);
                if beta.norm() > 0.0 {
                    s += beta * (C64::new(y, 0.0) - beta).ln() * 0.5;
                }
            }
            assert!(s.im.abs() < 1e-10);
            s.re
        };
        for y in [0.1, 1.0, 4.0] {
            let gap = phi(y) - p.kahler_potential(y).unwrap();
            assert!((gap + 0.75 * (a1 + a2)).abs() < 1e-10, "{gap}");
        }
        let kp = crate::toric_hessian::KahlerPotential::new(p.clone());
        for u in [0.3, 2.0] {
            let d = crate::numkit::fd_d1(|v| kp.value(v).unwrap(), u, None);
            assert!((d - p.y_of_u(u).unwrap() / u).abs() < 1e-8);
        }
    }
}

#[test]
fn eh_polar_agreement() {
    let mut r = rng(17);
    let b = 1.1;
    let mut printed_gap = 0.0f64;
    for a in [0.0, 0.6] {
        let f = AnsatzFamily::new(FamilyKind::Eh { a, c1: 1.0, c2: b * b }).unwrap();
        for _ in 0..20 {
            let s = (b * b).powf(0.25) * r.gen_range(1.05..3.0);
            let coords = [s, r.gen_range(0.2..2.9), r.gen_range(0.0..6.2), r.gen_range(0.0..6.2)];
            let g = eh_polar_metric(b, coords[0], coords[1], coords[2], coords[3]).unwrap();
            let push = eh_pushforward(&f, &coords, AngleMap::Derived).unwrap();
            assert!(rmax(&g, &push) < 1e-6 * (1.0 + g.max_abs()), "{:e}", rmax(&g, &push));
            let pr = eh_pushforward(&f, &coords, AngleMap::Printed).unwrap();
            printed_gap = printed_gap.max(rmax(&g, &pr));
        }
    }
    assert!(printed_gap > 1e-2);
    for _ in 0..10 {
        let (rr, th) = (r.gen_range(0.1..3.0), r.gen_range(0.1..3.0));
        assert!(rmax(&eh_polar_metric(0.0, rr, th, 0.0, 0.0).unwrap(), &eh_cone_metric(rr, th)) < 1e-10);
    }
    let th = 1.0;
    let dev = |s: f64| rmax(&eh_polar_metric(b, s, th, 0.0, 0.0).unwrap(), &eh_cone_metric(s, th));
    // O(b²/s⁴) relative to the O(s²) angular block and the O(1) radial entry
    for s in [10.0, 30.0] {
        assert!(dev(s) < 2.0 * b * b / s.powi(2));
    }
    assert!(matches!(eh_polar_metric(1.0, 0.9, 1.0, 0.0, 0.0), Err(GeomError::Domain(_))));
}

#[test]
fn p1p1_polar_agreement() {
    let mut r = rng(18);
    let mut printed_gap = 0.0f64;
    for (a1, a2) in [(0.7, 1.3), (1.0, 1.0), (0.0, 0.0)] {
        let f = AnsatzFamily::new(FamilyKind::P1p1 { a1, a2 }).unwrap();
        for _ in 0..15 {
            let coords = [
                r.gen_range(0.3..2.5),
                r.gen_range(0.2..2.9),
                r.gen_range(0.0..6.2),
                r.gen_range(0.2..2.9),
                r.gen_range(0.0..6.2),
                r.gen_range(0.0..6.2),
            ];
            let g = p1p1_polar_metric(a1, a2, f.profile.as_ref(), &coords).unwrap();
            let push = p1p1_pushforward(&f, &coords, AngleMap::Derived).unwrap();
            assert!(rmax(&g, &push) < 1e-6 * (1.0 + g.max_abs()), "{:e}", rmax(&g, &push));
            let pr = p1p1_pushforward(&f, &coords, AngleMap::Printed).unwrap();
            printed_gap = printed_gap.max(rmax(&g, &pr));
            if a1 == a2 {
                let sw = [coords[0], coords[3], coords[4], coords[1], coords[2], coords[5]];
                let gs = p1p1_polar_metric(a1, a2, f.profile.as_ref(), &sw).unwrap();
                let perm = [0, 3, 4, 1, 2, 5];
                let back = RMatrix::from_fn(6, |i, j| gs[(perm[i], perm[j])]);
                assert!(rmax(&g, &back) < 1e-14 * (1.0 + g.max_abs()));
            }
        }
    }
    assert!(printed_gap > 1e-2);
    // Kepler profile: angular block ∝ r, radial entry ∝ 1/r
    let p = KeplerLiftProfile;
    let c1 = [0.8, 1.0, 0.3, 2.0, 1.1, 0.4];
    let mut c2 = c1;
    c2[0] *= 3.0;
    let (g1, g2) = (p1p1_polar_metric(0.0, 0.0, &p, &c1).unwrap(), p1p1_polar_metric(0.0, 0.0, &p, &c2).unwrap());
    assert!((g2[(0, 0)] * 3.0 - g1[(0, 0)]).abs() < 1e-14);
    for i in 1..6 {
        for j in 1..6 {
            assert!((g2[(i, j)] - 3.0 * g1[(i, j)]).abs() < 1e-13);
        }
    }
}

#[test]
fn o22_zero_section() {
    let (a1, a2) = (0.7, 1.3);
    let f = AnsatzFamily::new(FamilyKind::O22 { a1, a2 }).unwrap();
    let (z1, z2) = (c(0.4, -0.3), c(-0.2, 0.9));
    let v0 = c(0.6, 0.8);
    let err = |t: f64, variant| {
        let q = [z1, z2, v0 * t];
        cmax(&blowdown_o22(a1, a2, &q).unwrap(), &zero_section_form(a1, a2, &q, variant))
    };
    let u = |t: f64| f.u(&[z1, z2, v0 * t]);
    let (t1, t2) = (1e-2, 1e-3);
    let slope =
        (err(t1, ZeroSectionVariant::Derived) / err(t2, ZeroSectionVariant::Derived)).ln() / (u(t1) / u(t2)).ln();
    assert!(slope > 1.99, "{slope}");
    // with P in place of P² the dv dv̄ entry is off at order one
    assert!(err(1e-4, ZeroSectionVariant::Printed) > 1e-2);
    // limit at v = 0 is finite and positive definite
    let lim = zero_section_form(a1, a2, &[z1, z2, c(0.0, 0.0)], ZeroSectionVariant::Derived);
    assert!(crate::numkit::hermitian_eigenvalues(&lim).iter().all(|e| *e > 0.0));
    assert!(err(1e-6, ZeroSectionVariant::Derived) < 1e-9);
    // ŷ₃ = ½y₃ against the P¹×P¹ chart through v = w²
    let p = AnsatzFamily::new(FamilyKind::P1p1 { a1, a2 }).unwrap();
    let w = c(0.5, 0.2);
    let yp = p.moment(&[z1, z2, w]).unwrap();
    let yo = f.moment(&[z1, z2, w * w]).unwrap();
    assert!((yo[2] - 0.5 * yp[2]).abs() < 1e-14 && (yo[0] - yp[0]).abs() < 1e-14);
    // θ̂₃ = 2θ₃
    assert!(((w * w).arg() - 2.0 * w.arg()).abs() < 1e-15);
}

#[test]
fn polytope_descriptions() {
    let d = moment_polytope(FamilyKind::UnRf { n: 2, b: 1.0 });
    assert_eq!(d.inequalities.len(), 3);
    assert_eq!(d.vertices.len(), 2);
    let d = moment_polytope(FamilyKind::Resolved3 { a: 0.5 });
    assert!(d.edges.iter().any(|e| e.length == Some(1.0) && e.direction == vec![-0.5, 0.0, 0.0]));
    assert_eq!(d.edges.len(), 5);
    let d = moment_polytope(FamilyKind::KeplerK3Lift);
    assert_eq!(d.generators.len(), 4);
    let json = d.to_json();
    assert_eq!(json["inequalities"][3], serde_json::json!([[-1.0, 1.0, 1.0], 0.0]));
    // every vertex and edge point lies in the domain with enough active constraints
    for kind in kinds() {
        let d = moment_polytope(kind);
        let n = d.inequalities[0].coeffs.len();
        for e in &d.edges {
            for t in [0.0, 0.5, 1.0] {
                let p: Vec<f64> = e.start.iter().zip(&e.direction).map(|(s, v)| s + t * v).collect();
                assert!(d.slack(&p) > -1e-12, "{kind:?}");
                let active = d.inequalities.iter().filter(|l| l.eval(&p).abs() < 1e-12).count();
                assert!(active + 1 >= n, "{kind:?} edge {e:?}");
            }
        }
    }
}

#[test]
fn polytope_contains_moment_images() {
    let mut r = rng(19);
    for f in families() {
        let d = moment_polytope(f.kind);
        for _ in 0..2000 {
            let z = f.sample_point(&mut r, 1e-3, 1e3);
            let y = f.moment(&z).unwrap();
            assert!(d.slack(&y) >= -1e-9, "{:?}: {y:?}", f.kind);
        }
    }
}

/// The printed quotient coordinates `x = (ny₁, y₂ − y₁, …)` satisfy
/// `x₁^∨ = (1/n)Σyᵢ^∨`, `xⱼ^∨ = yⱼ^∨`, and lie in `x₁ ≥ 0`, `xⱼ + x₁/n ≥ 0`,
/// `Σx ≥ b`; the torus acting on `(v, w)` has moments `(y/n, y₂, …)` instead.
#[test]
fn quotient_printed_coordinates() {
    let mut r = rng(20);
    for (n, b) in [(2, 1.0), (3, 0.5)] {
        let un = AnsatzFamily::new(FamilyKind::UnRf { n, b }).unwrap();
        let psi = family_psi(&un).unwrap();
        let back = |x: &[f64]| -> Vec<f64> {
            let mut y = vec![x[0] / n as f64];
            y.extend(x[1..].iter().map(|v| v + x[0] / n as f64));
            y
        };
        let qf = AnsatzFamily::new(FamilyKind::QuotientOn { n, b }).unwrap();
        for _ in 0..10 {
            let (z, y) = interior_moment(&un, &mut r);
            let x = quotient_printed_coords(&y);
            assert!(back(&x).iter().zip(&y).all(|(p, q)| (p - q).abs() < 1e-14));
            let sum: f64 = x.iter().sum();
            assert!(x[0] >= 0.0 && x[1..].iter().all(|v| v + x[0] / n as f64 >= -1e-14) && sum >= b - 1e-12);
            let gy = psi.gradient(&y).unwrap();
            let gx = crate::numkit::fd_gradient(|v| psi.value(&back(v)).unwrap(), &x, None).unwrap();
            assert!((gx[0] - gy.iter().sum::<f64>() / n as f64).abs() < 1e-7);
            for j in 1..n {
                assert!((gx[j] - gy[j]).abs() < 1e-7);
            }
            let yq = qf.moment(&quotient_map(n, &z).unwrap()).unwrap();
            assert!((yq[0] - y.iter().sum::<f64>() / n as f64).abs() < 1e-12);
            assert!((yq[0] - x[0]).abs() > 1e-6);
        }
    }
}

#[test]
fn family_kind_serde() {
    for k in kinds() {
        let s = serde_json::to_string(&k).unwrap();
        assert!(s.contains(k.name()));
        let back: FamilyKind = serde_json::from_str(&s).unwrap();
        assert_eq!(back, k);
    }
    let k: FamilyKind = serde_json::from_str(r#"{"family":"RESOLVED3","a":2.0}"#).unwrap();
    assert_eq!(k, FamilyKind::Resolved3 { a: 2.0 });
}

#[test]
fn custom_profile_family() {
    // the Kepler profile on the P¹×P¹ chart: the pullback of the Kepler lift
    let chart = AnsatzFamily::new(FamilyKind::P1p1 { a1: 0.0, a2: 0.0 }).unwrap().chart;
    let f = AnsatzFamily::with_profile(FamilyKind::P1p1 { a1: 0.0, a2: 0.0 }, chart, Arc::new(KeplerLiftProfile));
    let z = [c(0.3, 0.2), c(-0.5, 0.1), c(0.8, -0.4)];
    assert!((f.phi().value(f.u(&z)).unwrap() - f.u(&z).sqrt()).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn moments_stay_in_polytopes(idx in 0usize..16, seed in 0u64..1000) {
        let f = AnsatzFamily::new(kinds()[idx]).unwrap();
        let mut r = rng(seed);
        let z = f.sample_point(&mut r, 1e-2, 1e2);
        let y = f.moment(&z).unwrap();
        prop_assert!(moment_polytope(f.kind).slack(&y) >= -1e-9);
    }

    #[test]
    fn g_inverse_random(idx in 0usize..16, seed in 0u64..1000) {
        let f = AnsatzFamily::new(kinds()[idx]).unwrap();
        let mut r = rng(seed);
        let (_, y) = interior_moment(&f, &mut r);
        let (lo, up) = family_g(&f, &y).unwrap();
        prop_assert!(rmax(&lo.matmul(&up), &RMatrix::identity(f.dim())) < 1e-9);
        let inv = mat_inverse(&lo).unwrap();
        prop_assert!(rmax(&inv, &up) < 1e-8 * (1.0 + up.max_abs()));
    }
}
