use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use kepler_geom::metrics::{
    kepler_cone_split, kepler_det_closed_form, kepler_hermitian, kepler_hermitian_fd, kepler_ricci,
    kepler_ricci_closed_form, kepler_ricci_coefficient, moser_pullback_sasaki, profile_ricci, ricci_flat_ode_residual,
    sasaki_einstein_residual, sasaki_general, sasaki_sphere, ConifoldProfile, DeformedProfile, HdVariant,
    RadialProfile, SpherePair,
};
use kepler_geom::numkit::{mat_det, C64};
use kepler_geom::structures::{random_cone_point, ConifoldPoint};
use kepler_geom::Result;
use rand::Rng;

use super::{uniform, worst, Check, Rng64};

fn cone(k: usize, r: &mut Rng64) -> ConifoldPoint {
    random_cone_point(2 + k % 3, r).principal_chart()
}

fn kepler_fd(r: &mut Rng64, samples: usize) -> Result<f64> {
    worst(samples, |k| {
        let pt = cone(k, r);
        Ok(kepler_hermitian(&pt)?.sub(&kepler_hermitian_fd(&pt)?).max_abs())
    })
}

fn kepler_det(r: &mut Rng64, samples: usize) -> Result<f64> {
    worst(samples, |k| {
        let pt = cone(k, r);
        let closed = kepler_det_closed_form(&pt)?;
        Ok((mat_det(&kepler_hermitian(&pt)?).re - closed).abs() / closed.max(1.0))
    })
}

fn kepler_ricci_n2(r: &mut Rng64, samples: usize) -> Result<f64> {
    worst(samples, |_| Ok(kepler_ricci(&random_cone_point(2, r).principal_chart())?.max_abs()))
}

fn kepler_ricci_form(r: &mut Rng64, samples: usize) -> Result<f64> {
    worst(samples, |k| {
        let n = 3 + k % 2;
        let pt = random_cone_point(n, r).principal_chart();
        Ok(kepler_ricci(&pt)?.sub(&kepler_ricci_closed_form(&pt, kepler_ricci_coefficient(n))?).max_abs())
    })
}

fn cone_split(r: &mut Rng64, samples: usize) -> Result<f64> {
    worst(samples, |k| {
        Ok(kepler_cone_split(&cone(k, r), HdVariant::Derived)?.residual_with(2.0 * SQRT_2, FRAC_1_SQRT_2))
    })
}

fn sasaki_construction(r: &mut Rng64, samples: usize) -> Result<f64> {
    worst(samples, |k| {
        let n = 2 + k % 3;
        let (y, e) = (uniform(n, r, -1.5, 1.5), uniform(n, r, -1.5, 1.5));
        Ok(sasaki_sphere(&y, &e).sub(&sasaki_general(&y, &e)).max_abs())
    })
}

fn sasaki_pullback(r: &mut Rng64, samples: usize) -> Result<f64> {
    worst(samples, |k| {
        let n = 2 + k % 3;
        let (y, e) = (uniform(n, r, -1.5, 1.5), uniform(n, r, -1.5, 1.5));
        let s = sasaki_sphere(&y, &e);
        Ok(s.sub(&moser_pullback_sasaki(&y, &e)?).max_abs() / (1.0 + s.max_abs()))
    })
}

fn conifold_ricci(r: &mut Rng64, samples: usize) -> Result<f64> {
    worst(samples, |k| {
        let n = 2 + k % 3;
        let p = ConifoldProfile::new(n, 1.0, [0.0, 0.5][k % 2])?;
        Ok(profile_ricci(&p, &random_cone_point(n, r).principal_chart())?.max_abs())
    })
}

/// A point of `Σw² = a` with `w₀` on the principal branch.
fn deformed_point(n: usize, a: C64, r: &mut Rng64) -> Result<ConifoldPoint> {
    let coords: Vec<C64> = (0..n).map(|_| C64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
    let s: C64 = coords.iter().map(|z| z * z).sum();
    let mut w = vec![(a - s).sqrt()];
    w.extend(coords);
    ConifoldPoint::new(w, a)
}

fn deformed_ricci(r: &mut Rng64, samples: usize) -> Result<f64> {
    let a = C64::new(0.6, 0.4);
    worst(samples, |k| {
        let n = 2 + k % 2;
        let p = DeformedProfile::new(n, a.norm(), 1.0)?;
        Ok(profile_ricci(&p, &deformed_point(n, a, r)?)?.max_abs())
    })
}

fn profile_ode(r: &mut Rng64, samples: usize) -> Result<f64> {
    worst(samples, |k| {
        let n = 2 + k % 3;
        let c = r.gen_range(0.5..2.0);
        let (res, scale) = if k % 2 == 0 {
            let p = ConifoldProfile::new(n, c, 0.0)?;
            let t = r.gen_range(0.1..5.0);
            (ricci_flat_ode_residual(&p, n, 0.0, c, t)?, c + t * p.d1(t)?.powi(n as i32))
        } else {
            let a = r.gen_range(0.2..1.0);
            let p = DeformedProfile::new(n, a, c)?;
            let t = a * r.gen_range(1.05..5.0);
            (ricci_flat_ode_residual(&p, n, a, c, t)?, c + t * p.d1(t)?.powi(n as i32))
        };
        Ok(res.abs() / scale)
    })
}

/// Deviation of the fitted cone coefficients from `(2n/(n−1), 1, −2/n)`
/// together with the fit residual.
fn sasaki_einstein(r: &mut Rng64, samples: usize) -> Result<f64> {
    let mut m: f64 = 0.0;
    for n in [2, 3, 4] {
        let pts: Vec<(SpherePair, f64)> =
            (0..samples.max(3)).map(|_| (SpherePair::random(n, r), r.gen_range(0.2..5.0))).collect();
        let chk = sasaki_einstein_residual(n, &pts)?;
        let nf = n as f64;
        let want = [2.0 * nf / (nf - 1.0), 1.0, -2.0 / nf];
        for (f, w) in chk.fitted.iter().zip(want) {
            m = m.max((f - w).abs());
        }
        m = m.max(chk.fit_residual);
    }
    Ok(m)
}

pub fn checks() -> Vec<Check> {
    vec![
        Check {
            id: "met.kepler.potential",
            invariant: "Kepler Hermitian form equals the finite-difference ∂∂̄ of its potential",
            tolerance: 1e-7,
            samples: 60,
            run: kepler_fd,
        },
        Check {
            id: "met.kepler.det",
            invariant: "closed-form determinant of the Kepler metric",
            tolerance: 1e-8,
            samples: 60,
            run: kepler_det,
        },
        Check {
            id: "met.kepler.ricci_flat_n2",
            invariant: "Kepler metric is Ricci-flat for n = 2",
            tolerance: 1e-6,
            samples: 20,
            run: kepler_ricci_n2,
        },
        Check {
            id: "met.kepler.ricci",
            invariant: "Kepler Ricci form is +((n−2)/2)∂∂̄log t",
            tolerance: 1e-6,
            samples: 20,
            run: kepler_ricci_form,
        },
        Check {
            id: "met.kepler.cone",
            invariant: "Kepler metric is 2√2dr² + (1/√2)r²h_D on the cone",
            tolerance: 1e-7,
            samples: 100,
            run: cone_split,
        },
        Check {
            id: "met.sasaki.construction",
            invariant: "h_D in stereographic coordinates equals the Sasaki metric of the round sphere",
            tolerance: 1e-10,
            samples: 90,
            run: sasaki_construction,
        },
        Check {
            id: "met.sasaki.pullback",
            invariant: "Sasaki metric pulled back through the Moser map",
            tolerance: 1e-6,
            samples: 60,
            run: sasaki_pullback,
        },
        Check {
            id: "met.conifold.ricci",
            invariant: "radial conifold profiles are Ricci-flat",
            tolerance: 1e-5,
            samples: 60,
            run: conifold_ricci,
        },
        Check {
            id: "met.deformed.ricci",
            invariant: "deformed conifold profile is Ricci-flat",
            tolerance: 1e-5,
            samples: 60,
            run: deformed_ricci,
        },
        Check {
            id: "met.profile_ode",
            invariant: "profiles solve t f′ⁿ + (t² − |a|²)f′ⁿ⁻¹f″ = c",
            tolerance: 1e-10,
            samples: 100,
            run: profile_ode,
        },
        Check {
            id: "met.sasaki_einstein",
            invariant: "C t^{(n−1)/n} is a metric cone with coefficients (2n/(n−1), 1, −2/n)",
            tolerance: 1e-8,
            samples: 5,
            run: sasaki_einstein,
        },
    ]
}
