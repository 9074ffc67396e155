use kepler_geom::calabi_families::{AnsatzFamily, FamilyKind};
use kepler_geom::flows::{
    conifold_fixed_point, family_fixed_point, flow_residual, flow_rhs, hessian_dual_state, hessian_state, run_flow,
    un_fixed_point, Direction, FlowState, Scheme, PINNED,
};
use kepler_geom::numkit::Grid1D;
use kepler_geom::toric_hessian::{BProfile, UProfile};
use kepler_geom::Result;

use super::{Check, Rng64};

fn grid(a: f64, b: f64) -> Result<Grid1D> {
    Grid1D::uniform(a, b, 256)
}

/// Ricci-flat profiles as gauged fixed points, in the forward direction.
fn fixed_points(limit: usize) -> Result<Vec<FlowState>> {
    let mut out = Vec::new();
    for n in [2, 3, 4] {
        out.push(conifold_fixed_point(n, 4.0, 0.0, grid(1.0, 2.0)?)?);
    }
    for (n, b) in [(2, 1.0), (3, 1.0), (4, 0.5)] {
        out.push(un_fixed_point(n, b, grid(0.5, 2.0)?)?);
    }
    for kind in [
        FamilyKind::QuotientOn { n: 3, b: 0.8 },
        FamilyKind::Eh { a: 0.5, c1: 1.0, c2: 1.0 },
        FamilyKind::Resolved3 { a: 1.0 },
        FamilyKind::KrfK3,
        FamilyKind::P1p1 { a1: 0.0, a2: 0.0 },
        FamilyKind::P1p1 { a1: 1.0, a2: 0.0 },
        FamilyKind::P1p1 { a1: 0.5, a2: 2.0 },
        FamilyKind::O22 { a1: 1.0, a2: 1.0 },
    ] {
        out.push(family_fixed_point(&AnsatzFamily::new(kind)?, grid(0.3, 1.0)?)?);
    }
    out.truncate(limit.max(1));
    Ok(out.into_iter().map(|s| s.with_direction(Direction::Forward)).collect())
}

fn stationary(_: &mut Rng64, samples: usize) -> Result<f64> {
    let mut m: f64 = 0.0;
    for s in fixed_points(samples)? {
        m = m.max(flow_residual(&s)?);
    }
    Ok(m)
}

fn bumped(base: &FlowState) -> Result<FlowState> {
    let mut s = base.clone();
    let x = s.grid.nodes();
    let (lo, hi) = (x[PINNED], x[x.len() - PINNED - 1]);
    s.perturb(1e-3, 0.5 * (lo + hi), 0.3 * (hi - lo))?;
    Ok(s)
}

/// Largest step-to-step increase of the residual over 100 stable steps.
fn decay(scheme: Scheme, samples: usize) -> Result<f64> {
    let mut m: f64 = 0.0;
    for base in fixed_points(samples)? {
        let s = bumped(&base)?;
        let ds = 0.5 * s.stability_bound()?;
        let (_, trace) = run_flow(&s, &base, 100, ds, scheme)?;
        for w in trace.windows(2) {
            m = m.max(w[1].residual - w[0].residual);
        }
    }
    Ok(m)
}

/// Flow started at a fixed point stays there.
fn pinned(_: &mut Rng64, samples: usize) -> Result<f64> {
    let mut m: f64 = 0.0;
    for base in fixed_points(samples)? {
        let ds = 0.5 * base.stability_bound()?;
        let (_, trace) = run_flow(&base, &base, 20, ds, Scheme::Rk2)?;
        m = m.max(trace.last().map_or(0.0, |t| t.max_perturbation));
    }
    Ok(m)
}

/// At the b-family, the Hessian flow's right-hand side is `−Σyᵢ^∨ = −ns`
/// and the dual flow's is `n ln(u/n)`.
fn hessian_rhs(_: &mut Rng64, samples: usize) -> Result<f64> {
    let mut m: f64 = 0.0;
    for (k, (n, b)) in [(2, 1.0), (3, 0.5), (2, 0.0), (4, 1.0)].into_iter().enumerate() {
        if k >= samples.max(1) {
            break;
        }
        let nf = n as f64;
        let s = hessian_state(n, b, Grid1D::uniform(-0.5, 1.0, 200)?, 0.0, 0.0)?;
        let rhs = flow_rhs(&s)?;
        let x = s.grid.nodes();
        for i in PINNED..x.len() - PINNED {
            m = m.max((rhs[i] + nf * x[i]).abs());
        }
        let d = hessian_dual_state(n, b, Grid1D::uniform(b + 0.5, b + 2.0, 200)?, 0.0, 0.0)?;
        let rhs = flow_rhs(&d)?;
        let p = BProfile::new(n, b)?;
        let x = d.grid.nodes();
        for i in PINNED..x.len() - PINNED {
            let u = p.ln_u(x[i])?.exp();
            m = m.max((rhs[i] - nf * (u / nf).ln()).abs());
        }
    }
    Ok(m)
}

pub fn checks() -> Vec<Check> {
    vec![
        Check {
            id: "flw.fixed_point",
            invariant: "Ricci-flat profiles are stationary for their gauged flow",
            tolerance: 1e-6,
            samples: 14,
            run: stationary,
        },
        Check {
            id: "flw.stays_fixed",
            invariant: "flow started at a fixed point does not move",
            tolerance: 1e-9,
            samples: 14,
            run: pinned,
        },
        Check {
            id: "flw.decay.euler",
            invariant: "residual never increases after a bump (forward time, explicit Euler)",
            tolerance: 0.0,
            samples: 14,
            run: |_, n| decay(Scheme::Euler, n),
        },
        Check {
            id: "flw.decay.rk2",
            invariant: "residual never increases after a bump (forward time, Heun)",
            tolerance: 0.0,
            samples: 14,
            run: |_, n| decay(Scheme::Rk2, n),
        },
        Check {
            id: "flw.hessian_rhs",
            invariant: "Hessian flows at the b-family have right-hand sides −ns and n ln(u/n)",
            tolerance: 1e-7,
            samples: 4,
            run: hessian_rhs,
        },
    ]
}
