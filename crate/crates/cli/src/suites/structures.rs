use kepler_geom::numkit::{cnorm_sqr, C64};
use kepler_geom::structures::{
    chart_from_z, chart_transition, conifold_to_kepler, kepler_to_conifold, lc_constant_j, lc_expected_symplectic,
    lc_pullback_j, lc_pullback_symplectic, nijenhuis_residual, norm_identities_residual, quaternion_residual,
    random_cone_point, z_from_chart, z_from_w, ChartId, JLabel,
};
use kepler_geom::Result;

use super::regularization::phase_point;
use super::{uniform, worst, Check, Rng64};

fn nijenhuis(label: JLabel, r: &mut Rng64, samples: usize) -> Result<f64> {
    worst(samples, |_| nijenhuis_residual(label, &phase_point(r), 1e-4))
}

/// `2 − (observed order)` of the Nijenhuis residual between h = 1e-3 and 1e-4.
fn nijenhuis_order(r: &mut Rng64, samples: usize) -> Result<f64> {
    let mut order = f64::INFINITY;
    for label in [JLabel::J2, JLabel::J3] {
        for _ in 0..samples {
            let s = phase_point(r);
            let a = nijenhuis_residual(label, &s, 1e-3)?;
            let b = nijenhuis_residual(label, &s, 1e-4)?;
            order = order.min((a / b).log10());
        }
    }
    Ok(2.0 - order)
}

fn lc_point(r: &mut Rng64) -> Vec<f64> {
    loop {
        let v = uniform(4, r, -2.0, 2.0);
        if v[0].hypot(v[1]) > 0.3 {
            return v;
        }
    }
}

fn lc_symplectic(r: &mut Rng64, samples: usize) -> Result<f64> {
    worst(samples, |_| Ok(lc_pullback_symplectic(&lc_point(r))?.sub(&lc_expected_symplectic()).max_abs()))
}

fn lc_j(r: &mut Rng64, samples: usize) -> Result<f64> {
    worst(samples, |_| {
        let v = lc_point(r);
        let mut m: f64 = 0.0;
        for label in [JLabel::J1, JLabel::J2, JLabel::J3] {
            m = m.max(lc_pullback_j(label, &v)?.sub(&lc_constant_j(label)).max_abs());
        }
        Ok(m)
    })
}

fn conifold_round_trip(r: &mut Rng64, samples: usize) -> Result<f64> {
    worst(samples, |k| {
        let pt = random_cone_point(2 + k % 3, r);
        let back = kepler_to_conifold(&conifold_to_kepler(&pt)?);
        let quadric: C64 = pt.w.iter().map(|z| z * z).sum();
        let diff = pt.w.iter().zip(&back.w).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        Ok(diff.max(quadric.norm()) / (1.0 + cnorm_sqr(&pt.w)))
    })
}

fn cone_w4(r: &mut Rng64) -> [C64; 4] {
    let w = random_cone_point(3, r).w;
    [w[0], w[1], w[2], w[3]]
}

fn chart_round_trip(r: &mut Rng64, samples: usize) -> Result<f64> {
    worst(samples, |_| {
        let z = z_from_w(&cone_w4(r));
        let scale = 1.0 + cnorm_sqr(&z);
        let mut m: f64 = (z[0] * z[1] - z[2] * z[3]).norm() / scale;
        for from in ChartId::all() {
            let p = chart_from_z(&z, from)?;
            let back = z_from_chart(&p)?;
            m = m.max(back.iter().zip(&z).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale);
            for to in ChartId::all() {
                let direct = chart_from_z(&z, to)?;
                let via = chart_transition(&p, to)?;
                let d = direct.coords.iter().zip(&via.coords).map(|(a, b)| (a - b).norm() / (1.0 + a.norm()));
                m = m.max(d.fold(0.0, f64::max));
            }
        }
        Ok(m)
    })
}

fn norm_identities(r: &mut Rng64, samples: usize) -> Result<f64> {
    worst(samples, |_| {
        let w = cone_w4(r);
        let (r1, r2) = norm_identities_residual(&w)?;
        Ok(r1.abs().max(r2) / (1.0 + cnorm_sqr(&w)))
    })
}

pub fn checks() -> Vec<Check> {
    vec![
        Check {
            id: "str.quaternion",
            invariant: "J₁² = J₂² = J₃² = −1 and J₁J₂ = J₃ on T*R²",
            tolerance: 1e-9,
            samples: 500,
            run: |r, n| worst(n, |_| quaternion_residual(&phase_point(r))),
        },
        Check {
            id: "str.nijenhuis.j1",
            invariant: "Nijenhuis tensor of J₁ vanishes",
            tolerance: 1e-5,
            samples: 20,
            run: |r, n| nijenhuis(JLabel::J1, r, n),
        },
        Check {
            id: "str.nijenhuis.j2",
            invariant: "Nijenhuis tensor of J₂ vanishes (h = 1e-4)",
            tolerance: 1e-5,
            samples: 20,
            run: |r, n| nijenhuis(JLabel::J2, r, n),
        },
        Check {
            id: "str.nijenhuis.j3",
            invariant: "Nijenhuis tensor of J₃ vanishes (h = 1e-4)",
            tolerance: 1e-5,
            samples: 20,
            run: |r, n| nijenhuis(JLabel::J3, r, n),
        },
        Check {
            id: "str.nijenhuis.order",
            invariant: "Nijenhuis residuals of J₂, J₃ shrink at second order in h",
            tolerance: 0.2,
            samples: 10,
            run: nijenhuis_order,
        },
        Check {
            id: "str.lc.symplectic",
            invariant: "Levi-Civita map pulls dp∧dx + dq∧dy back to 2dω∧dξ + 2dχ∧dη",
            tolerance: 1e-6,
            samples: 100,
            run: lc_symplectic,
        },
        Check {
            id: "str.lc.complex_structures",
            invariant: "J₁, J₂, J₃ pull back to constant structures on R⁴",
            tolerance: 1e-6,
            samples: 100,
            run: lc_j,
        },
        Check {
            id: "str.conifold.round_trip",
            invariant: "conifold ↔ T*S^n identification is a bijection onto Σw² = 0",
            tolerance: 1e-12,
            samples: 300,
            run: conifold_round_trip,
        },
        Check {
            id: "str.charts",
            invariant: "resolution charts invert and transition consistently; z₁z₂ = z₃z₄",
            tolerance: 1e-12,
            samples: 100,
            run: chart_round_trip,
        },
        Check {
            id: "str.norm_identities",
            invariant: "Σ|w|² = ½Σ|z|² and chart norm products equal Σ|z|²",
            tolerance: 1e-12,
            samples: 300,
            run: norm_identities,
        },
    ]
}
