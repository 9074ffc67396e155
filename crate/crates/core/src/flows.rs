//! Kähler–Ricci-type flows on one-variable reductions of the potential.
//!
//! Each kind evolves nodal values of a potential on a [`Grid1D`]:
//!
//! * `CONIFOLD`: `f(t)`, `∂f = −ln[t f′ⁿ + t² f′ⁿ⁻¹ f″] + λf + C₁`
//! * `UN`: `φ(u)`, `∂φ = −(ln[(φ′ + uφ″)φ′ⁿ⁻¹] + λφ + C₁)`
//! * `CALABI_ANSATZ`: `UN` with base factors `Π(a_g + uφ′)^{d_g}` and a weight `u^{−κ}`
//! * `HESSIAN`: `ψ^∨` along the diagonal `y^∨ = (s, …, s)`, `∂ψ^∨ = −ln det(∂²ψ^∨) + λψ^∨ + C₁`
//! * `HESSIAN_DUAL`: the radial part `Λ(y)` of `ψ = Σyᵢ(ln yᵢ − 1) − y(ln y − 1) + Λ(y)`
//!   along `yᵢ = y/n`, `∂ψ = −ln det(∂²ψ) + λψ + C₁`
//!
//! Derivatives are five-point stencils; the two outermost nodes at each end
//! are pinned to their initial values.

use serde::{Deserialize, Serialize};

use crate::calabi_families::{AnsatzFamily, FamilyKind};
use crate::error::{GeomError, Result};
use crate::metrics::{ConifoldProfile, RadialProfile};
use crate::numkit::{mat_det, Grid1D, RMatrix};
use crate::toric_hessian::{BProfile, KahlerPotential, UProfile};

/// Nodes held fixed at each end.
pub const PINNED: usize = 2;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FlowKind {
    Conifold {
        n: usize,
    },
    Un {
        n: usize,
    },
    /// `bases` are `(a_g, d_g)` pairs; `fiber` is the fiber rank `m`.
    CalabiAnsatz {
        bases: Vec<(f64, usize)>,
        fiber: usize,
        kappa: f64,
    },
    Hessian {
        n: usize,
    },
    HessianDual {
        n: usize,
    },
}

impl FlowKind {
    fn dim(&self) -> usize {
        match self {
            FlowKind::Conifold { n } | FlowKind::Un { n } | FlowKind::Hessian { n } | FlowKind::HessianDual { n } => *n,
            FlowKind::CalabiAnsatz { bases, fiber, .. } => fiber + bases.iter().map(|b| b.1).sum::<usize>(),
        }
    }

    /// Sign of `C₁ + λf` in the right-hand side.
    fn gauge_sign(&self) -> f64 {
        match self {
            FlowKind::Un { .. } | FlowKind::CalabiAnsatz { .. } => -1.0,
            _ => 1.0,
        }
    }

    /// The gauge that makes a profile with constant log argument `c` stationary.
    pub fn gauge_for(&self, c: f64) -> f64 {
        self.gauge_sign() * c.ln()
    }
}

/// Time direction. `Printed` is `dω/dt = ρ + λω`, whose right-hand side
/// decreases with the second derivative of the potential, so it smooths
/// backwards in time and no explicit step is stable. `Forward` negates the
/// right-hand side, the usual `dω/dt = −ρ − λω` normalisation, with the
/// same fixed points.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    #[default]
    Printed,
    Forward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Euler,
    Rk2,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FlowState {
    pub grid: Grid1D,
    pub values: Vec<f64>,
    pub kind: FlowKind,
    pub lambda: f64,
    pub c1: f64,
    pub direction: Direction,
}

/// Log argument and linearised diffusion coefficient at one node.
fn local(kind: &FlowKind, x: f64, f1: f64, f2: f64) -> Result<(f64, f64)> {
    let bad = |v: f64| GeomError::Degenerate { node: usize::MAX, value: v };
    match kind {
        FlowKind::Conifold { n } => {
            if !(f1 > 0.0) {
                return Err(bad(f1));
            }
            let p = f1.powi(*n as i32 - 1);
            let a = x * p * f1 + x * x * p * f2;
            Ok((a, x * x * p / a))
        }
        FlowKind::Un { n } => {
            let (s, m) = (f1 + x * f2, f1.powi(*n as i32 - 1));
            if !(f1 > 0.0) {
                return Err(bad(f1));
            }
            Ok((s * m, x / s))
        }
        FlowKind::CalabiAnsatz { bases, fiber, kappa } => {
            if !(f1 > 0.0) {
                return Err(bad(f1));
            }
            let s = f1 + x * f2;
            let mut a = s * f1.powi(*fiber as i32 - 1) * x.powf(-kappa);
            for (coeff, d) in bases {
                a *= (coeff + x * f1).powi(*d as i32);
            }
            Ok((a, x / s))
        }
        FlowKind::Hessian { n } => {
            // G^{ij} at y^∨ = (s, …, s): (ψ′/n)δ + ((ψ″ − ψ′)/n²)·11ᵀ
            let nf = *n as f64;
            if !(f1 > 0.0) {
                return Err(bad(f1));
            }
            let g = RMatrix::from_fn(*n, |i, j| (if i == j { f1 / nf } else { 0.0 }) + (f2 - f1) / (nf * nf));
            Ok((mat_det(&g), 1.0 / f2))
        }
        FlowKind::HessianDual { n } => {
            // G_ij at yᵢ = y/n: (n/y)δ − 1/y + Λ″
            let nf = *n as f64;
            if !(x > 0.0) {
                return Err(bad(x));
            }
            let g = RMatrix::from_fn(*n, |i, j| (if i == j { nf / x } else { 0.0 }) - 1.0 / x + f2);
            Ok((mat_det(&g), 1.0 / f2))
        }
    }
}

impl FlowState {
    pub fn new(kind: FlowKind, grid: Grid1D, values: Vec<f64>, lambda: f64, c1: f64) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(GeomError::Config(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        if grid.len() < 2 * PINNED + 1 {
            return Err(GeomError::Config("grid too small for the pinned boundary".into()));
        }
        if kind.dim() == 0 {
            return Err(GeomError::Config("flow dimension must be positive".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(GeomError::Evaluation("initial flow values".into()));
        }
        Ok(Self { grid, values, kind, lambda, c1, direction: Direction::Printed })
    }

    pub fn with_direction(mut self, direction: Direction) -> Self {
        self.direction = direction;
        self
    }

    /// Samples `f` at the grid nodes.
    pub fn from_fn(kind: FlowKind, grid: Grid1D, f: impl Fn(f64) -> Result<f64>, lambda: f64, c1: f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&x| f(x)).collect::<Result<Vec<f64>>>()?;
        Self::new(kind, grid, values, lambda, c1)
    }

    fn interior(&self) -> std::ops::Range<usize> {
        PINNED..self.grid.len() - PINNED
    }

    /// `(log argument, diffusion coefficient)` at every interior node.
    fn locals(&self, values: &[f64]) -> Result<Vec<(f64, f64)>> {
        let (d1, d2) = self.grid.derivatives(values);
        let x = self.grid.nodes();
        self.interior()
            .map(|i| {
                let (a, d) = local(&self.kind, x[i], d1[i], d2[i]).map_err(|e| match e {
                    GeomError::Degenerate { value, .. } => GeomError::Degenerate { node: i, value },
                    e => e,
                })?;
                if !(a > 0.0) || !(d > 0.0) {
                    return Err(GeomError::Degenerate { node: i, value: a.min(d) });
                }
                Ok((a, d))
            })
            .collect()
    }

    /// Right-hand side at every node (zero on the pinned nodes).
    pub fn rhs_of(&self, values: &[f64]) -> Result<Vec<f64>> {
        let locals = self.locals(values)?;
        let x = self.grid.nodes();
        let mut out = vec![0.0; values.len()];
        let sign = self.kind.gauge_sign();
        let dir = if self.direction == Direction::Forward { -1.0 } else { 1.0 };
        for (k, i) in self.interior().enumerate() {
            let own = match self.kind {
                // ψ at the diagonal point is Λ − y ln n
                FlowKind::HessianDual { n } => values[i] - x[i] * (n as f64).ln(),
                _ => values[i],
            };
            let lg = locals[k].0.ln();
            let printed =
                if sign > 0.0 { -lg + self.lambda * own + self.c1 } else { -(lg + self.lambda * own + self.c1) };
            out[i] = dir * printed;
        }
        Ok(out)
    }

    /// Largest stable explicit Euler step, `3h²/(8 max D)`: the five-point
    /// second-difference stencil has spectral radius `16/(3h²)`. Zero in the
    /// printed direction.
    pub fn stability_bound(&self) -> Result<f64> {
        if self.direction == Direction::Printed {
            self.locals(&self.values)?;
            return Ok(0.0);
        }
        let dmax = self.locals(&self.values)?.iter().map(|l| l.1).fold(0.0, f64::max);
        let h = self.grid.min_spacing();
        Ok(3.0 * h * h / (8.0 * dmax))
    }

    /// `max |f − f₀|` against a reference state on the same grid.
    pub fn deviation(&self, reference: &FlowState) -> f64 {
        self.values.iter().zip(&reference.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// Adds `amp·|f|·(1 − r²)⁴`, `r = (x − center)/width`: a `C³` bump of
    /// relative height `amp`, wide enough to be resolved by the stencil.
    /// The support must avoid the pinned nodes.
    pub fn perturb(&mut self, amp: f64, center: f64, width: f64) -> Result<()> {
        let x = self.grid.nodes();
        let (lo, hi) = (x[PINNED], x[x.len() - PINNED - 1]);
        if center - width < lo || center + width > hi {
            return Err(GeomError::Config(format!("bump support must lie in [{lo}, {hi}]")));
        }
        for (v, &t) in self.values.iter_mut().zip(x) {
            let r = (t - center) / width;
            if r.abs() < 1.0 {
                *v += amp * v.abs() * (1.0 - r * r).powi(4);
            }
        }
        Ok(())
    }
}

pub fn flow_rhs(state: &FlowState) -> Result<Vec<f64>> {
    state.rhs_of(&state.values)
}

/// `L∞` norm of the right-hand side over the interior nodes.
pub fn flow_residual(state: &FlowState) -> Result<f64> {
    Ok(flow_rhs(state)?.iter().fold(0.0, |m, v| m.max(v.abs())))
}

/// One explicit step; refuses `ds` above [`FlowState::stability_bound`].
pub fn flow_step(state: &FlowState, ds: f64, scheme: Scheme) -> Result<FlowState> {
    let bound = state.stability_bound()?;
    if !(ds > 0.0) || ds > bound {
        return Err(GeomError::Unstable { ds, bound });
    }
    flow_step_unchecked(state, ds, scheme)
}

/// One explicit step without the stability check.
pub fn flow_step_unchecked(state: &FlowState, ds: f64, scheme: Scheme) -> Result<FlowState> {
    let k1 = flow_rhs(state)?;
    let euler: Vec<f64> = state.values.iter().zip(&k1).map(|(v, k)| v + ds * k).collect();
    let values = match scheme {
        Scheme::Euler => euler,
        Scheme::Rk2 => {
            let k2 = state.rhs_of(&euler)?;
            state.values.iter().zip(k1.iter().zip(&k2)).map(|(v, (a, b))| v + 0.5 * ds * (a + b)).collect()
        }
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(GeomError::Evaluation("flow step".into()));
    }
    Ok(FlowState { values, ..state.clone() })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub time: f64,
    pub residual: f64,
    pub max_perturbation: f64,
}

/// Runs `steps` steps, recording the residual and the deviation from `reference`.
pub fn run_flow(
    state: &FlowState,
    reference: &FlowState,
    steps: usize,
    ds: f64,
    scheme: Scheme,
) -> Result<(FlowState, Vec<TraceRow>)> {
    let mut cur = state.clone();
    let mut trace = vec![TraceRow {
        step: 0,
        time: 0.0,
        residual: flow_residual(&cur)?,
        max_perturbation: cur.deviation(reference),
    }];
    for k in 1..=steps {
        cur = flow_step(&cur, ds, scheme)?;
        trace.push(TraceRow {
            step: k,
            time: k as f64 * ds,
            residual: flow_residual(&cur)?,
            max_perturbation: cur.deviation(reference),
        });
    }
    Ok((cur, trace))
}

/// The Ricci-flat conifold profile with `t f′ⁿ + t² f′ⁿ⁻¹ f″ = c` as a gauged fixed point.
pub fn conifold_fixed_point(n: usize, c: f64, c1: f64, grid: Grid1D) -> Result<FlowState> {
    let p = ConifoldProfile::new(n, c, c1)?;
    let kind = FlowKind::Conifold { n };
    let gauge = kind.gauge_for(c);
    FlowState::from_fn(kind, grid, |t| p.value(t), 0.0, gauge)
}

/// `φ(u)` of the b-family under the `UN` flow (log argument 1).
pub fn un_fixed_point(n: usize, b: f64, grid: Grid1D) -> Result<FlowState> {
    let phi = KahlerPotential::new(BProfile::new(n, b)?);
    FlowState::from_fn(FlowKind::Un { n }, grid, |u| phi.value(u), 0.0, 0.0)
}

/// Flow kind and log-argument constant `c` under which a Ricci-flat family's
/// `φ(u)` is stationary.
pub fn family_flow(kind: FamilyKind) -> Result<(FlowKind, f64)> {
    Ok(match kind {
        FamilyKind::UnRf { n, .. } => (FlowKind::Un { n }, 1.0),
        FamilyKind::QuotientOn { n, .. } => {
            (FlowKind::CalabiAnsatz { bases: vec![(0.0, n - 1)], fiber: 1, kappa: (n - 1) as f64 }, 1.0)
        }
        FamilyKind::Eh { a, c1, .. } => (FlowKind::CalabiAnsatz { bases: vec![(a, 1)], fiber: 1, kappa: 1.0 }, c1),
        FamilyKind::Resolved3 { a } => {
            (FlowKind::CalabiAnsatz { bases: vec![(a, 1)], fiber: 2, kappa: 0.0 }, 2.0 / 3.0)
        }
        FamilyKind::KrfK3 => (FlowKind::CalabiAnsatz { bases: vec![(0.0, 1)], fiber: 2, kappa: 0.0 }, 2.0 / 3.0),
        FamilyKind::P1p1 { a1, a2 } | FamilyKind::O22 { a1, a2 } => {
            (FlowKind::CalabiAnsatz { bases: vec![(a1, 1), (a2, 1)], fiber: 1, kappa: 1.0 }, 2.0 / 3.0)
        }
        FamilyKind::KeplerK3Lift => {
            return Err(GeomError::Config("the Kepler lift is not Ricci-flat".into()));
        }
    })
}

/// A Ricci-flat family's `φ(u)` as a gauged fixed point of its flow.
pub fn family_fixed_point(f: &AnsatzFamily, grid: Grid1D) -> Result<FlowState> {
    let (kind, c) = family_flow(f.kind)?;
    let gauge = kind.gauge_for(c);
    let phi = f.phi();
    FlowState::from_fn(kind, grid, |u| phi.value(u), 0.0, gauge)
}

/// `ψ^∨(s) = φ(n eˢ)` for the b-family.
pub fn hessian_state(n: usize, b: f64, grid: Grid1D, lambda: f64, c1: f64) -> Result<FlowState> {
    let phi = KahlerPotential::new(BProfile::new(n, b)?);
    let nf = n as f64;
    FlowState::from_fn(FlowKind::Hessian { n }, grid, |s| phi.value(nf * s.exp()), lambda, c1)
}

/// `Λ(y) = ∫ln u` for the b-family.
pub fn hessian_dual_state(n: usize, b: f64, grid: Grid1D, lambda: f64, c1: f64) -> Result<FlowState> {
    let p = BProfile::new(n, b)?;
    FlowState::from_fn(FlowKind::HessianDual { n }, grid, |y| p.int_ln_u(y), lambda, c1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::fd_d1;
    use crate::toric_hessian::metric_g;
    use proptest::prelude::*;

    fn grid(a: f64, b: f64, n: usize) -> Grid1D {
        Grid1D::uniform(a, b, n).unwrap()
    }

    pub(super) fn rf_states() -> Vec<(String, FlowState)> {
        let mut out = Vec::new();
        for n in [2, 3, 4] {
            for c1 in [0.0, 0.5] {
                out.push((
                    format!("conifold n={n} c₁={c1}"),
                    conifold_fixed_point(n, 4.0, c1, grid(1.0, 2.0, 256)).unwrap(),
                ));
            }
        }
        for (n, b) in [(2, 1.0), (3, 1.0), (4, 0.5), (3, 0.0)] {
            out.push((format!("b-family n={n} b={b}"), un_fixed_point(n, b, grid(0.5, 2.0, 256)).unwrap()));
        }
        for kind in [
            FamilyKind::QuotientOn { n: 3, b: 0.8 },
            FamilyKind::Eh { a: 0.5, c1: 1.0, c2: 1.0 },
            FamilyKind::Eh { a: 0.0, c1: 2.0, c2: 0.3 },
            FamilyKind::Resolved3 { a: 1.0 },
            FamilyKind::KrfK3,
            FamilyKind::P1p1 { a1: 0.0, a2: 0.0 },
            FamilyKind::P1p1 { a1: 1.0, a2: 0.0 },
            FamilyKind::P1p1 { a1: 1.0, a2: 1.0 },
            FamilyKind::P1p1 { a1: 0.5, a2: 2.0 },
            FamilyKind::O22 { a1: 1.0, a2: 1.0 },
        ] {
            let f = AnsatzFamily::new(kind).unwrap();
            out.push((kind.name().to_string(), family_fixed_point(&f, grid(0.3, 1.0, 256)).unwrap()));
        }
        out
    }

    #[test]
    fn ricci_flat_profiles_are_fixed_points() {
        for (name, s) in rf_states() {
            let r = flow_residual(&s).unwrap();
            assert!(r < 1e-6, "{name}: {r:e}");
        }
        let flat = un_fixed_point(3, 0.0, grid(0.5, 2.0, 64)).unwrap();
        assert!(flow_residual(&flat).unwrap() < 1e-9);
    }

    #[test]
    fn wrong_gauge_is_not_stationary() {
        let mut s = conifold_fixed_point(3, 4.0, 0.0, grid(1.0, 2.0, 128)).unwrap();
        s.c1 = 0.0;
        assert!((flow_residual(&s).unwrap() - 4f64.ln()).abs() < 1e-7);
        assert!(matches!(family_flow(FamilyKind::KeplerK3Lift), Err(GeomError::Config(_))));
    }

    #[test]
    fn one_step_from_fixed_point() {
        for (name, s) in rf_states() {
            let h = s.grid.min_spacing();
            let next = flow_step_unchecked(&s, 0.1 * h * h, Scheme::Euler).unwrap();
            assert!(next.deviation(&s) < 1e-12, "{name}");
            let s = s.with_direction(Direction::Forward);
            let next = flow_step(&s, 0.1 * h * h, Scheme::Euler).unwrap();
            assert!(next.deviation(&s) < 1e-12, "{name}");
            let next = flow_step(&s, 0.1 * h * h, Scheme::Rk2).unwrap();
            assert!(next.deviation(&s) < 1e-12, "{name}");
        }
    }

    #[test]
    fn perturbations_decay_monotonically() {
        for (name, base) in rf_states() {
            let base = base.with_direction(Direction::Forward);
            let mut s = base.clone();
            let x = s.grid.nodes();
            let (lo, hi) = (x[PINNED], x[x.len() - PINNED - 1]);
            s.perturb(1e-3, 0.5 * (lo + hi), 0.3 * (hi - lo)).unwrap();
            let h = s.grid.min_spacing();
            let (end, trace) = run_flow(&s, &base, 100, 0.1 * h * h, Scheme::Euler).unwrap();
            assert!(trace[0].residual > 1e-4, "{name}");
            for w in trace.windows(2) {
                assert!(
                    w[1].residual <= w[0].residual,
                    "{name}: step {} {:e} → {:e}",
                    w[1].step,
                    w[0].residual,
                    w[1].residual
                );
            }
            assert!(end.deviation(&base) <= s.deviation(&base));
            assert!(trace[100].residual < trace[0].residual, "{name}");
        }
    }

    #[test]
    fn printed_direction_is_anti_diffusive() {
        for (name, base) in rf_states() {
            let mut s = base.clone();
            let x = s.grid.nodes();
            let (lo, hi) = (x[PINNED], x[x.len() - PINNED - 1]);
            s.perturb(1e-3, 0.5 * (lo + hi), 0.3 * (hi - lo)).unwrap();
            let h = s.grid.min_spacing();
            assert!(
                matches!(flow_step(&s, 0.1 * h * h, Scheme::Euler), Err(GeomError::Unstable { bound, .. }) if bound == 0.0)
            );
            let next = flow_step_unchecked(&s, 0.1 * h * h, Scheme::Euler).unwrap();
            assert!(flow_residual(&next).unwrap() > flow_residual(&s).unwrap(), "{name}");
            // the two directions differ only in sign
            let (a, b) = (flow_rhs(&s).unwrap(), flow_rhs(&s.clone().with_direction(Direction::Forward)).unwrap());
            assert!(a.iter().zip(&b).all(|(p, q)| p == &-q));
        }
    }

    #[test]
    fn large_steps_are_refused_and_blow_up() {
        let base = un_fixed_point(2, 1.0, grid(0.5, 2.0, 128)).unwrap().with_direction(Direction::Forward);
        let mut s = base.clone();
        s.perturb(1e-3, 1.25, 0.5).unwrap();
        let bound = s.stability_bound().unwrap();
        assert!(matches!(flow_step(&s, 2.0 * bound, Scheme::Euler), Err(GeomError::Unstable { .. })));
        // below the bound the residual decays, well above it the highest mode grows
        let run = |ds: f64| -> f64 {
            let mut cur = s.clone();
            for _ in 0..60 {
                match flow_step_unchecked(&cur, ds, Scheme::Euler) {
                    Ok(next) => cur = next,
                    Err(_) => return f64::INFINITY,
                }
            }
            flow_residual(&cur).unwrap_or(f64::INFINITY)
        };
        let r0 = flow_residual(&s).unwrap();
        assert!(run(0.9 * bound) < r0);
        assert!(run(3.0 * bound) > 10.0 * r0);
    }

    #[test]
    fn gauge_invariance_iff_lambda_zero() {
        for (_, s) in rf_states().into_iter().take(8) {
            for lambda in [0.0, 0.7] {
                let mut a = s.clone();
                a.lambda = lambda;
                let mut b = a.clone();
                b.values.iter_mut().for_each(|v| *v += 0.3);
                let (ra, rb) = (flow_rhs(&a).unwrap(), flow_rhs(&b).unwrap());
                let gap = a.interior().map(|i| (ra[i] - rb[i]).abs()).fold(0.0, f64::max);
                if lambda == 0.0 {
                    assert!(gap < 1e-9);
                } else {
                    assert!((gap - 0.3 * lambda).abs() < 1e-9);
                }
            }
        }
    }

    /// `−ln det G^{ij} = −Σyᵢ^∨` at the b-family: affine, so no constant gauge
    /// makes it stationary. The dual flow sees `+Σyᵢ^∨ = n ln(u/n)`.
    #[test]
    fn hessian_flows_at_b_family() {
        for (n, b) in [(2, 1.0), (3, 0.5), (3, 0.0)] {
            let s = hessian_state(n, b, grid(-0.5, 1.0, 200), 0.0, 0.0).unwrap();
            let rhs = flow_rhs(&s).unwrap();
            let x = s.grid.nodes();
            for i in s.interior() {
                assert!((rhs[i] + n as f64 * x[i]).abs() < 1e-8, "{n} {b}: {} vs {}", rhs[i], -(n as f64) * x[i]);
            }
            let d = hessian_dual_state(n, b, grid(b + 0.5, b + 2.0, 200), 0.0, 0.0).unwrap();
            let rhs = flow_rhs(&d).unwrap();
            let p = BProfile::new(n, b).unwrap();
            let nf = n as f64;
            for i in d.interior() {
                let u = p.ln_u(d.grid.nodes()[i]).unwrap().exp();
                assert!((rhs[i] - nf * (u / nf).ln()).abs() < 1e-7);
            }
        }
    }

    /// The diagonal `G^{ij}` built from `ψ^∨(s)` equals the toric `G^{ij}` at the
    /// matching moment point.
    #[test]
    fn hessian_determinant_matches_toric() {
        let (n, b) = (3, 0.8);
        let p = BProfile::new(n, b).unwrap();
        let phi = KahlerPotential::new(p);
        let nf = n as f64;
        for s in [-0.3, 0.2, 0.9] {
            let u = nf * f64::exp(s);
            let psi = |t: f64| phi.value(nf * t.exp()).unwrap();
            let (f1, f2) = (fd_d1(psi, s, Some(1e-4)), crate::numkit::fd_d2(psi, s, Some(1e-3)));
            let (a, _) = local(&FlowKind::Hessian { n }, s, f1, f2).unwrap();
            let y = p.y_of_u(u).unwrap();
            let (_, up) = metric_g(&p, &vec![y / nf; n]).unwrap();
            assert!((a / mat_det(&up) - 1.0).abs() < 1e-7);
        }
    }

    #[test]
    fn degeneration_reports_node() {
        let g = grid(0.5, 2.0, 32);
        let s = FlowState::from_fn(FlowKind::Un { n: 2 }, g, |u| Ok(-u), 0.0, 0.0).unwrap();
        assert!(matches!(flow_rhs(&s), Err(GeomError::Degenerate { node: 2, .. })));
        let g = grid(0.5, 2.0, 32);
        assert!(FlowState::new(FlowKind::Un { n: 2 }, g, vec![0.0; 3], 0.0, 0.0).is_err());
    }

    #[test]
    fn kind_serde() {
        let k = FlowKind::CalabiAnsatz { bases: vec![(0.5, 1)], fiber: 2, kappa: 0.0 };
        let s = serde_json::to_string(&k).unwrap();
        assert!(s.contains("CALABI_ANSATZ"));
        assert_eq!(serde_json::from_str::<FlowKind>(&s).unwrap(), k);
        assert_eq!(serde_json::from_str::<FlowKind>(r#"{"kind":"UN","n":3}"#).unwrap(), FlowKind::Un { n: 3 });
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn random_bumps_are_visible(center in 0.9f64..1.6, amp in 1e-4f64..1e-3) {
            let base = un_fixed_point(2, 1.0, grid(0.5, 2.0, 128)).unwrap().with_direction(Direction::Forward);
            let mut s = base.clone();
            s.perturb(amp, center, 0.2).unwrap();
            prop_assert!(flow_residual(&s).unwrap() > 0.0);
            let h = s.grid.min_spacing();
            let next = flow_step(&s, 0.1 * h * h, Scheme::Euler).unwrap();
            prop_assert!(flow_residual(&next).unwrap() <= flow_residual(&s).unwrap());
        }
    }
}
