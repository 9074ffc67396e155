use super::*;
use crate::numkit::{hermitian_eigenvalues, sym_eigenvalues, I};
use crate::structures::random_cone_point;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_c(n: usize, r: &mut ChaCha8Rng) -> Vec<C64> {
    (0..n).map(|_| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect()
}

/// Point of `Σw² = a` from random chart coordinates, `w₀` on the principal branch.
fn deformed_point(coords: Vec<C64>, a: C64) -> ConifoldPoint {
    let s: C64 = coords.iter().map(|z| z * z).sum();
    let mut w = vec![(a - s).sqrt()];
    w.extend(coords);
    ConifoldPoint::new(w, a).unwrap()
}

#[test]
fn t_jet_matches_fd() {
    let mut r = rng(1);
    for a in [C64::new(0.0, 0.0), C64::new(0.3, -0.7)] {
        let z = random_c(3, &mut r);
        let j = quadric_t_jet(&z, a).unwrap();
        let dd = fd_ddbar(|v| quadric_t(v, a), &z, None).unwrap();
        assert!(dd.sub(&j.ddt).max_abs() < 1e-8);
        // ∂t = ½(∂_x − i∂_y)t
        let h = 1e-6;
        for k in 0..3 {
            let f = |d: C64| {
                let mut v = z.clone();
                v[k] += d;
                quadric_t(&v, a)
            };
            let dx = (f(C64::new(h, 0.0)) - f(C64::new(-h, 0.0))) / (2.0 * h);
            let dy = (f(C64::new(0.0, h)) - f(C64::new(0.0, -h))) / (2.0 * h);
            assert!((C64::new(0.5 * dx, -0.5 * dy) - j.dt[k]).norm() < 1e-8);
        }
    }
}

#[test]
fn rank_two_identity_brute_force() {
    let mut r = rng(2);
    for n in 2..=4 {
        for _ in 0..10 {
            let w = random_c(n, &mut r);
            let z = random_c(n, &mut r);
            let x: f64 = r.gen_range(-0.8..2.0);
            let m = CMatrix::from_fn(n, |i, j| {
                let d = if i == j { 1.0 } else { 0.0 };
                C64::new(d, 0.0) + w[i] * w[j].conj() + z[i] * z[j].conj() * x
            });
            let brute = mat_det(&m);
            assert!(brute.im.abs() < 1e-12);
            assert!((brute.re - rank_two_det(&w, &z, x)).abs() < 1e-11 * (1.0 + brute.re.abs()));
        }
    }
}

#[test]
fn kepler_matches_fd_and_is_positive() {
    let mut r = rng(3);
    for n in [2, 3, 4] {
        for _ in 0..25 {
            let pt = random_cone_point(n, &mut r);
            let h = kepler_hermitian(&pt).unwrap();
            let fd = kepler_hermitian_fd(&pt).unwrap();
            assert!(h.sub(&fd).max_abs() < 1e-7, "n={n}: {}", h.sub(&fd).max_abs());
            assert!(h.is_hermitian(1e-14));
            assert!(hermitian_eigenvalues(&h)[0] > 0.0);
            let det = mat_det(&h).re;
            let closed = kepler_det_closed_form(&pt).unwrap();
            assert!((det - closed).abs() < 1e-8 * closed.max(1.0), "n={n}: {det} vs {closed}");
        }
    }
}

#[test]
fn kepler_potential_is_half_norm_relation() {
    // 2i∂∂̄(|w|/√2) = i∂∂̄(√2|w|): the potential equals √2|w⃗|
    let mut r = rng(4);
    let pt = random_cone_point(3, &mut r);
    let full = cnorm_sqr(&pt.w).sqrt();
    assert!((kepler_potential(&pt.w[1..]) - std::f64::consts::SQRT_2 * full).abs() < 1e-13);
}

#[test]
fn kepler_chart_rejects_w0_zero() {
    let w = vec![C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 1.0)];
    let pt = ConifoldPoint::new(w, C64::new(0.0, 0.0)).unwrap();
    assert!(matches!(kepler_hermitian(&pt), Err(GeomError::Chart(_))));
}

#[test]
fn kepler_ricci_n2_vanishes() {
    let mut r = rng(5);
    for _ in 0..5 {
        let pt = random_cone_point(2, &mut r);
        let rho = kepler_ricci(&pt).unwrap();
        assert!(rho.max_abs() < 1e-6, "{}", rho.max_abs());
    }
}

#[test]
fn kepler_ricci_sign() {
    // log det H = −log|S| − ((n−2)/2) log t + const, so ρ = +((n−2)/2)∂∂̄log t
    let mut r = rng(6);
    for n in [3, 4] {
        let pt = random_cone_point(n, &mut r);
        let rho = kepler_ricci(&pt).unwrap();
        assert!(rho.is_hermitian(1e-6));
        let derived = kepler_ricci_closed_form(&pt, kepler_ricci_coefficient(n)).unwrap();
        assert!(rho.sub(&derived).max_abs() < 1e-6, "{}", rho.sub(&derived).max_abs());
        let printed = kepler_ricci_closed_form(&pt, kepler_ricci_printed_coefficient(n)).unwrap();
        assert!(rho.sub(&printed).max_abs() > 1e-3);
    }
}

#[test]
fn log_t_closed_form_matches_fd() {
    let mut r = rng(7);
    let z = random_c(3, &mut r);
    let a = C64::new(0.0, 0.0);
    let fd = fd_ddbar(|v| quadric_t(v, a).ln(), &z, None).unwrap();
    assert!(fd.sub(&log_t_ddbar(&z, a).unwrap()).max_abs() < 1e-8);
}

#[test]
fn k2_potential_is_flat_under_levi_civita() {
    // √2|w⃗| = ξ² + η² + ω² + χ² = |z₁|² + |z₂|²
    let mut r = rng(8);
    for _ in 0..50 {
        let v: Vec<f64> = (0..4).map(|_| r.gen_range(-2.0..2.0)).collect();
        let pot = k2_lc_potential(&v).unwrap();
        let sq: f64 = v.iter().map(|c| c * c).sum();
        assert!((pot - sq).abs() < 1e-12 * (1.0 + sq));
    }
    let z0 = [C64::new(0.4, 0.9), C64::new(-1.1, 0.3)];
    // z₁ = ω + iξ, z₂ = χ + iη
    let pot = |z: &[C64]| k2_lc_potential(&[z[0].im, z[1].im, z[0].re, z[1].re]).unwrap();
    let dd = fd_ddbar(pot, &z0, None).unwrap();
    assert!(dd.sub(&CMatrix::identity(2)).max_abs() < 1e-8);
}

#[test]
fn cone_split_constants() {
    let mut r = rng(9);
    for n in [2, 3, 4] {
        let pt = random_cone_point(n, &mut r);
        let split = kepler_cone_split(&pt, HdVariant::Derived).unwrap();
        // the metric is (1/u)du² + u·h = 2√2·dr² + (1/√2)·r²h
        let ([alpha, beta], res) = split.fit().unwrap();
        assert!((alpha - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-9, "{alpha}");
        assert!((beta - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-9, "{beta}");
        assert!(res < 1e-9);
        assert!(split.residual > 1e-2);
    }
}

#[test]
fn cone_split_intrinsic_h_agrees() {
    let mut r = rng(10);
    let pt = random_cone_point(3, &mut r);
    let split = kepler_cone_split(&pt, HdVariant::Derived).unwrap();
    let u = split.u;
    let uh: Vec<f64> = pt.w.iter().map(|z| z.re / u).collect();
    let vh: Vec<f64> = pt.w.iter().map(|z| z.im / u).collect();
    let mut dxs = Vec::new();
    let mut dxis = Vec::new();
    for dw in chart_tangents(&pt).unwrap() {
        let dre: Vec<f64> = dw.iter().map(|z| z.re).collect();
        let dim: Vec<f64> = dw.iter().map(|z| z.im).collect();
        let (a, b) = (dot(&uh, &dre), dot(&vh, &dim));
        dxs.push(dre.iter().zip(&uh).map(|(d, e)| (d - e * a) / u).collect());
        dxis.push(dim.iter().zip(&vh).map(|(d, e)| (d - e * b) / u).collect());
    }
    let h = intrinsic_sasaki(&uh, &dxs, &dxis);
    assert!(h.sub(&split.h).max_abs() < 1e-10);
    // and g = (1/u)du² + u·h
    let g = split.radial_part().scale(2.0 * std::f64::consts::SQRT_2).add(&h.scale(u));
    assert!(g.sub(&split.metric).max_abs() < 1e-10);
}

#[test]
fn cone_split_scaling() {
    // r² = √2·u, so w ↦ λw scales r by √λ
    let mut r = rng(11);
    let pt = random_cone_point(3, &mut r);
    let lam = 3.7;
    let scaled = ConifoldPoint { w: pt.w.iter().map(|z| z * lam).collect(), a: pt.a };
    let r1 = kepler_cone_split(&pt, HdVariant::Derived).unwrap().r;
    let r2 = kepler_cone_split(&scaled, HdVariant::Derived).unwrap().r;
    assert!((r2 / r1 - lam.sqrt()).abs() < 1e-12);
}

#[test]
fn conifold_profiles_ricci_flat() {
    let mut r = rng(12);
    for (n, c1) in [(2, 0.0), (3, 0.0), (3, 0.8), (4, 0.3)] {
        let p = ConifoldProfile::new(n, 1.0, c1).unwrap();
        for _ in 0..3 {
            let pt = random_cone_point(n, &mut r);
            let rho = profile_ricci(&p, &pt).unwrap();
            assert!(rho.max_abs() < 1e-5, "n={n}: {}", rho.max_abs());
            let det = mat_det(&metric_from_profile(&p, &pt).unwrap()).re;
            let closed = profile_det_closed_form(&p, &pt).unwrap();
            assert!((det - closed).abs() < 1e-8 * closed.max(1.0));
            assert!((closed * pt.w[0].norm_sqr() - 1.0).abs() < 1e-10);
        }
    }
}

#[test]
fn deformed_profiles_ricci_flat() {
    let mut r = rng(13);
    for n in [2, 3] {
        let a = C64::new(0.6, 0.4);
        let p = DeformedProfile::new(n, a.norm(), 1.0).unwrap();
        for _ in 0..3 {
            let pt = deformed_point(random_c(n, &mut r), a);
            let rho = profile_ricci(&p, &pt).unwrap();
            assert!(rho.max_abs() < 1e-5, "n={n}: {}", rho.max_abs());
            let h = metric_from_profile(&p, &pt).unwrap();
            let closed = profile_det_closed_form(&p, &pt).unwrap();
            assert!((mat_det(&h).re - closed).abs() < 1e-8 * closed.max(1.0));
        }
    }
}

#[test]
fn deformed_determinant_with_generic_profile() {
    // f(t) = t² is not Ricci-flat; the determinant identity still holds
    let mut r = rng(14);
    let p = PowerProfile::new(1.0, 2.0);
    let a = C64::new(-0.5, 1.2);
    for n in [2, 3, 4] {
        let pt = deformed_point(random_c(n, &mut r), a);
        let fd = fd_ddbar(|v| p.value(quadric_t(v, a)).unwrap(), &pt.w[1..], None).unwrap();
        let det = mat_det(&fd).re;
        let closed = profile_det_closed_form(&p, &pt).unwrap();
        assert!((det - closed).abs() < 1e-7 * closed.abs().max(1.0), "{det} vs {closed}");
    }
}

#[test]
fn linear_profile_determinant() {
    let mut r = rng(15);
    let pt = random_cone_point(3, &mut r);
    let p = PowerProfile::new(1.0, 1.0);
    let t = cnorm_sqr(&pt.w);
    let closed = profile_det_closed_form(&p, &pt).unwrap();
    assert!((closed - t / pt.w[0].norm_sqr()).abs() < 1e-12 * closed);
}

#[test]
fn negative_profile_is_rejected() {
    let mut r = rng(16);
    let pt = random_cone_point(3, &mut r);
    let p = PowerProfile::new(-1.0, 1.0);
    assert!(matches!(metric_from_profile(&p, &pt), Err(GeomError::NotPositive { .. })));
}

#[test]
fn sasaki_einstein_cone_coefficients() {
    let mut r = rng(17);
    for n in [2, 3, 4] {
        let samples: Vec<(SpherePair, f64)> =
            (0..5).map(|_| (SpherePair::random(n, &mut r), r.gen_range(0.2..5.0))).collect();
        let chk = sasaki_einstein_residual(n, &samples).unwrap();
        let nf = n as f64;
        // angular and contact parts as displayed; the radial part carries 2n/(n−1)
        assert!((chk.fitted[0] - 2.0 * nf / (nf - 1.0)).abs() < 1e-8, "{:?}", chk.fitted);
        assert!((chk.fitted[1] - 1.0).abs() < 1e-8);
        assert!((chk.fitted[2] + 2.0 / nf).abs() < 1e-8);
        assert!(chk.fit_residual < 1e-8);
        assert!(chk.residual > 1e-3);
    }
}

#[test]
fn real_metric_is_symmetric_positive() {
    let mut r = rng(18);
    let pt = random_cone_point(3, &mut r);
    let g = real_metric(&kepler_hermitian(&pt).unwrap());
    assert!(g.sub(&g.transpose()).max_abs() < 1e-14);
    assert!(sym_eigenvalues(&g)[0] > 0.0);
    // J-invariance: g(iX, iY) = g(X, Y)
    let h = kepler_hermitian(&pt).unwrap();
    let x = vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.5), C64::new(1.0, 0.0)];
    let y = vec![C64::new(0.0, 1.0), C64::new(0.4, 0.4), C64::new(-0.3, 0.2)];
    let gxy = |a: &[C64], b: &[C64]| {
        let hb = h.matvec(&b.iter().map(|z| z.conj()).collect::<Vec<_>>());
        2.0 * a.iter().zip(&hb).map(|(p, q)| p * q).sum::<C64>().re
    };
    let ix: Vec<C64> = x.iter().map(|z| z * I).collect();
    let iy: Vec<C64> = y.iter().map(|z| z * I).collect();
    assert!((gxy(&x, &y) - gxy(&ix, &iy)).abs() < 1e-14);
}
