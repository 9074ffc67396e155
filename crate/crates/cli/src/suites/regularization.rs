use std::f64::consts::{PI, TAU};

use kepler_geom::numkit::norm;
use kepler_geom::regularization::{
    integrate_regularized, kepler_hamiltonian, kepler_vector_field, lc_energy_residual, lc_forward, lc_hamiltonian,
    lc_inverse, lie_scale, moser_forward, moser_identity_residuals, poisson_bracket, regularized_frequency,
    FlatCotangentPoint, LCState, MoserResiduals, PhaseState2D, TrajectoryRow,
};
use kepler_geom::Result;
use rand::Rng;

use super::{uniform, worst, Check, Rng64};

fn flat_point(k: usize, r: &mut Rng64) -> FlatCotangentPoint {
    let n = [2, 3, 5][k % 3];
    FlatCotangentPoint { y: uniform(n, r, -2.0, 2.0), eta: uniform(n, r, -2.0, 2.0) }
}

fn moser(r: &mut Rng64, samples: usize, pick: fn(&MoserResiduals) -> f64) -> Result<f64> {
    worst(samples, |k| {
        let pt = flat_point(k, r);
        Ok(pick(&moser_identity_residuals(&pt, r, 4)?))
    })
}

pub(super) fn phase_point(r: &mut Rng64) -> PhaseState2D {
    loop {
        let v = uniform(4, r, -2.0, 2.0);
        if v[0].hypot(v[1]) > 0.3 {
            return PhaseState2D::from_slice(&v);
        }
    }
}

fn lc_point(r: &mut Rng64) -> LCState {
    loop {
        let v = uniform(4, r, -2.0, 2.0);
        if v[0].hypot(v[1]) > 0.3 {
            return LCState::new(v[0], v[1], v[2], v[3]);
        }
    }
}

/// A state on the energy-`e` surface with `|ζ|` inside the allowed disc.
fn on_shell(e: f64, r: &mut Rng64) -> LCState {
    let zeta = r.gen_range(0.2..0.9) * (-1.0 / e).sqrt();
    let (a, b) = (r.gen_range(0.0..TAU), r.gen_range(0.0..TAU));
    let big = (8.0 * (1.0 + e * zeta * zeta)).sqrt();
    LCState::new(zeta * a.cos(), zeta * a.sin(), big * b.cos(), big * b.sin())
}

/// Three regularized periods at 1024 steps per period.
fn orbit(r: &mut Rng64) -> Result<(f64, f64, Vec<TrajectoryRow>)> {
    let e = -r.gen_range(0.1..2.0);
    let init = on_shell(e, r);
    let dt = TAU / regularized_frequency(e) / 1024.0;
    let rows = integrate_regularized(e, &init, 3072.0 * dt, Some(dt))?;
    Ok((e, dt, rows))
}

/// Least-squares frequency from `f_{k+1} + f_{k−1} = 2cos(ωΔ)f_k`.
fn recurrence_frequency(series: &[Vec<f64>], dt: f64) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for f in series {
        for k in 1..f.len() - 1 {
            num += (f[k + 1] + f[k - 1]) * f[k];
            den += 2.0 * f[k] * f[k];
        }
    }
    (num / den).acos() / dt
}

fn hamilton(r: &mut Rng64, samples: usize) -> Result<f64> {
    worst(samples, |_| {
        let s = phase_point(r);
        let (field, _) = kepler_vector_field(&s)?;
        let h = |v: &[f64]| kepler_hamiltonian(&PhaseState2D::from_slice(v)).unwrap_or(f64::NAN);
        let mut err: f64 = 0.0;
        for (k, want) in field.iter().enumerate() {
            let got = poisson_bracket(h, |v: &[f64]| v[k], &s)?;
            err = err.max((got - want).abs() / (1.0 + want.abs()));
        }
        Ok(err)
    })
}

fn lc_round_trip(r: &mut Rng64, samples: usize) -> Result<f64> {
    worst(samples, |_| {
        let s = phase_point(r);
        let back = lc_forward(&lc_inverse(&s)?)?.as_array();
        let scale = 1.0 + norm(&s.as_array());
        Ok(back.iter().zip(s.as_array()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale)
    })
}

fn lc_energy(r: &mut Rng64, samples: usize) -> Result<f64> {
    worst(samples, |_| {
        let v = lc_point(r);
        let h = lc_hamiltonian(&v)?;
        Ok((h - kepler_hamiltonian(&lc_forward(&v)?)?).abs() / (1.0 + h.abs()))
    })
}

fn energy_surface(r: &mut Rng64, samples: usize) -> Result<f64> {
    worst(samples, |_| {
        let (e, _, rows) = orbit(r)?;
        Ok(rows.iter().map(|q| lc_energy_residual(&q.state(), e).abs()).fold(0.0, f64::max))
    })
}

fn frequency(r: &mut Rng64, samples: usize) -> Result<f64> {
    worst(samples, |_| {
        let (e, dt, rows) = orbit(r)?;
        let cols: Vec<Vec<f64>> = vec![
            rows.iter().map(|q| q.xi).collect(),
            rows.iter().map(|q| q.eta).collect(),
            rows.iter().map(|q| q.omega).collect(),
            rows.iter().map(|q| q.chi).collect(),
        ];
        Ok((recurrence_frequency(&cols, dt) - (-e / 2.0).sqrt()).abs())
    })
}

/// The physical orbit closes after half a regularized period (ζ ↦ −ζ).
fn closure(r: &mut Rng64, samples: usize) -> Result<f64> {
    worst(samples, |_| {
        let e = -r.gen_range(0.1..2.0);
        let init = on_shell(e, r);
        let w = regularized_frequency(e);
        let rows = integrate_regularized(e, &init, PI / w, Some(PI / w / 512.0))?;
        let (a, b) = (&rows[0], &rows[rows.len() - 1]);
        let d = [a.x - b.x, a.y - b.y, a.p - b.p, a.q - b.q];
        Ok(norm(&d) / (1.0 + norm(&[a.x, a.y, a.p, a.q])))
    })
}

fn lie_scaling(r: &mut Rng64, samples: usize) -> Result<f64> {
    worst(samples, |_| {
        let s = phase_point(r);
        let lam = r.gen_range(0.3..3.0);
        let h = kepler_hamiltonian(&s)?;
        Ok((kepler_hamiltonian(&lie_scale(&s, lam)?)? * lam * lam - h).abs())
    })
}

fn norm_relation(r: &mut Rng64, samples: usize) -> Result<f64> {
    worst(samples, |k| {
        let pt = flat_point(k, r);
        let xi = moser_forward(&pt).point.xi;
        let ny = norm(&pt.y);
        Ok((norm(&xi) - 0.5 * (1.0 + ny * ny) * norm(&pt.eta)).abs())
    })
}

pub fn checks() -> Vec<Check> {
    vec![
        Check {
            id: "reg.moser.unit",
            invariant: "Moser image lies on the unit sphere: |x|² = 1",
            tolerance: 1e-10,
            samples: 300,
            run: |r, n| moser(r, n, |m| m.unit.abs()),
        },
        Check {
            id: "reg.moser.orthogonal",
            invariant: "Moser image is a cotangent vector: x·ξ = 0",
            tolerance: 1e-10,
            samples: 300,
            run: |r, n| moser(r, n, |m| m.orthogonal.abs()),
        },
        Check {
            id: "reg.moser.reconstruction",
            invariant: "η = (1 − x₀)ξ_j + ξ₀x_j recovers the flat momentum",
            tolerance: 1e-10,
            samples: 300,
            run: |r, n| moser(r, n, |m| m.reconstruction),
        },
        Check {
            id: "reg.moser.norm",
            invariant: "|ξ| = ½(1 + |y|²)|η|",
            tolerance: 1e-10,
            samples: 300,
            run: norm_relation,
        },
        Check {
            id: "reg.moser.pullback",
            invariant: "Moser map pulls ξ·dx back to η·dy",
            tolerance: 1e-7,
            samples: 300,
            run: |r, n| moser(r, n, |m| m.pullback),
        },
        Check {
            id: "reg.hamilton",
            invariant: "Kepler vector field equals {H, coordinate} for the stated bracket",
            tolerance: 1e-6,
            samples: 100,
            run: hamilton,
        },
        Check {
            id: "reg.lc.round_trip",
            invariant: "Levi-Civita map inverts its principal-branch preimage",
            tolerance: 1e-12,
            samples: 300,
            run: lc_round_trip,
        },
        Check {
            id: "reg.lc.energy",
            invariant: "regularized energy (¼|Ω|² − 2)/(2|ζ|²) equals H after the map",
            tolerance: 1e-12,
            samples: 300,
            run: lc_energy,
        },
        Check {
            id: "reg.lc.energy_surface",
            invariant: "RK4 trajectories stay on |Ω|² = 8(1 + E|ζ|²)",
            tolerance: 1e-9,
            samples: 10,
            run: energy_surface,
        },
        Check {
            id: "reg.lc.frequency",
            invariant: "regularized oscillator frequency is √(−E/2)",
            tolerance: 1e-8,
            samples: 10,
            run: frequency,
        },
        Check {
            id: "reg.lc.closure",
            invariant: "physical orbit closes after half a regularized period",
            tolerance: 1e-8,
            samples: 10,
            run: closure,
        },
        Check {
            id: "reg.lie_scaling",
            invariant: "H(λ²x, p/λ)·λ² = H",
            tolerance: 1e-12,
            samples: 1000,
            run: lie_scaling,
        },
    ]
}
