//! Convex potentials on moment domains and their Legendre duals.

use std::sync::Arc;

use serde::Serialize;

use super::profile::UProfile;
use crate::error::{GeomError, Result};
use crate::numkit::{dot, mat_inverse, sym_eigenvalues, RMatrix};

/// A strictly convex function on an open domain of Rⁿ with exact
/// gradient and Hessian.
pub trait HessianPotential: Send + Sync {
    fn dim(&self) -> usize;
    fn value(&self, y: &[f64]) -> Result<f64>;
    fn gradient(&self, y: &[f64]) -> Result<Vec<f64>>;
    fn hessian(&self, y: &[f64]) -> Result<RMatrix>;
    fn contains(&self, y: &[f64]) -> bool;
}

/// `l(y) = c·y + k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AffineForm {
    pub coeffs: Vec<f64>,
    pub constant: f64,
}

impl AffineForm {
    pub fn new(coeffs: Vec<f64>, constant: f64) -> Self {
        Self { coeffs, constant }
    }

    /// The coordinate `yᵢ` in dimension `n`.
    pub fn coordinate(n: usize, i: usize) -> Self {
        let mut c = vec![0.0; n];
        c[i] = 1.0;
        Self::new(c, 0.0)
    }

    /// `Σyᵢ + k`.
    pub fn total(n: usize, constant: f64) -> Self {
        Self::new(vec![1.0; n], constant)
    }

    pub fn eval(&self, y: &[f64]) -> f64 {
        dot(&self.coeffs, y) + self.constant
    }
}

/// `w·l(ln l − 1)`, or with `imag ≠ 0` the conjugate pair
/// `w·[L(ln L − 1) + L̄(ln L̄ − 1)]`, `L = l + i·imag`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogTerm {
    pub weight: f64,
    pub form: AffineForm,
    pub imag: f64,
}

impl LogTerm {
    pub fn new(weight: f64, form: AffineForm) -> Self {
        Self { weight, form, imag: 0.0 }
    }

    pub fn pair(weight: f64, form: AffineForm, imag: f64) -> Self {
        Self { weight, form, imag }
    }

    /// `(value, first-derivative factor, second-derivative factor)` in `l`.
    fn jet(&self, y: &[f64]) -> Result<(f64, f64, f64)> {
        let x = self.form.eval(y);
        let w = self.weight;
        if self.imag == 0.0 {
            if !(x > 0.0) {
                return Err(GeomError::Boundary(format!("affine form {x:e} ≤ 0")));
            }
            let lnx = x.ln();
            Ok((w * x * (lnx - 1.0), w * lnx, w / x))
        } else {
            let s = self.imag;
            let r2 = x * x + s * s;
            let lnr = 0.5 * r2.ln();
            Ok((2.0 * w * (x * (lnr - 1.0) - s * s.atan2(x)), 2.0 * w * lnr, 2.0 * w * x / r2))
        }
    }
}

/// `ψ(y) = Σ wᵢ lᵢ(ln lᵢ − 1) + Λ(s(y)) + c·y`, where `Λ` is an
/// antiderivative of `ln u` for a profile evaluated at an affine argument `s`.
#[derive(Clone)]
pub struct ComplexPotential {
    pub dim: usize,
    pub terms: Vec<LogTerm>,
    pub radial: Option<(AffineForm, Arc<dyn UProfile>)>,
    pub linear: Option<Vec<f64>>,
}

impl ComplexPotential {
    pub fn new(dim: usize, terms: Vec<LogTerm>, radial: Option<(AffineForm, Arc<dyn UProfile>)>) -> Self {
        Self { dim, terms, radial, linear: None }
    }

    pub fn with_linear(mut self, c: Vec<f64>) -> Self {
        self.linear = Some(c);
        self
    }

    /// `x ↦ ψ(Mx)` for a square matrix `M`.
    pub fn pullback(&self, m: &RMatrix) -> Self {
        let tr =
            |c: &[f64]| -> Vec<f64> { (0..m.dim()).map(|j| (0..c.len()).map(|i| c[i] * m[(i, j)]).sum()).collect() };
        let form = |f: &AffineForm| AffineForm::new(tr(&f.coeffs), f.constant);
        Self {
            dim: m.dim(),
            terms: self.terms.iter().map(|t| LogTerm { weight: t.weight, form: form(&t.form), imag: t.imag }).collect(),
            radial: self.radial.as_ref().map(|(f, p)| (form(f), p.clone())),
            linear: self.linear.as_ref().map(|c| tr(c)),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "dim": self.dim,
            "terms": self.terms,
            "radial": self.radial.as_ref().map(|(f, p)| serde_json::json!({ "argument": f, "profile": p.describe() })),
            "linear": self.linear,
        })
    }

    fn check_dim(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim {
            return Err(GeomError::Config(format!("expected {} coordinates, got {}", self.dim, y.len())));
        }
        Ok(())
    }
}

impl HessianPotential for ComplexPotential {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, y: &[f64]) -> Result<f64> {
        self.check_dim(y)?;
        let mut v = 0.0;
        for t in &self.terms {
            v += t.jet(y)?.0;
        }
        if let Some((s, p)) = &self.radial {
            v += p.int_ln_u(s.eval(y))?;
        }
        if let Some(c) = &self.linear {
            v += dot(c, y);
        }
        Ok(v)
    }

    fn gradient(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(y)?;
        let mut g = vec![0.0; self.dim];
        let mut add = |c: &[f64], k: f64| g.iter_mut().zip(c).for_each(|(gi, ci)| *gi += k * ci);
        for t in &self.terms {
            add(&t.form.coeffs, t.jet(y)?.1);
        }
        if let Some((s, p)) = &self.radial {
            add(&s.coeffs, p.ln_u(s.eval(y))?);
        }
        if let Some(c) = &self.linear {
            add(c, 1.0);
        }
        Ok(g)
    }

    fn hessian(&self, y: &[f64]) -> Result<RMatrix> {
        self.check_dim(y)?;
        let mut h = RMatrix::zeros(self.dim);
        let mut add = |c: &[f64], k: f64| {
            for i in 0..c.len() {
                for j in 0..c.len() {
                    h[(i, j)] += k * c[i] * c[j];
                }
            }
        };
        for t in &self.terms {
            add(&t.form.coeffs, t.jet(y)?.2);
        }
        if let Some((s, p)) = &self.radial {
            add(&s.coeffs, p.dlog(s.eval(y))?[0]);
        }
        Ok(h)
    }

    fn contains(&self, y: &[f64]) -> bool {
        y.len() == self.dim
            && self.terms.iter().all(|t| t.imag != 0.0 || t.form.eval(y) > 0.0)
            && self.radial.as_ref().is_none_or(|(s, p)| p.check(s.eval(y)).is_ok())
    }
}

/// Value, gradient and Hessian at a point.
#[derive(Clone, Debug, Serialize)]
pub struct PotentialEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: RMatrix,
}

pub fn evaluate(p: &dyn HessianPotential, y: &[f64]) -> Result<PotentialEval> {
    Ok(PotentialEval { value: p.value(y)?, gradient: p.gradient(y)?, hessian: p.hessian(y)? })
}

/// Legendre data at a primal point: `y^∨ = ∇ψ`, `ψ^∨ = y·y^∨ − ψ`,
/// `Hess ψ^∨ = (Hess ψ)⁻¹`.
#[derive(Clone, Debug, Serialize)]
pub struct DualEval {
    pub dual_point: Vec<f64>,
    pub value: f64,
    pub hessian: RMatrix,
}

fn require_convex(h: &RMatrix) -> Result<()> {
    let min = sym_eigenvalues(h).into_iter().fold(f64::INFINITY, f64::min);
    if min > 0.0 {
        Ok(())
    } else {
        Err(GeomError::NotConvex(format!("Hessian eigenvalue {min:e}")))
    }
}

pub fn legendre_dual(p: &dyn HessianPotential, y: &[f64]) -> Result<DualEval> {
    let h = p.hessian(y)?;
    require_convex(&h)?;
    let g = p.gradient(y)?;
    Ok(DualEval { value: dot(y, &g) - p.value(y)?, hessian: mat_inverse(&h)?, dual_point: g })
}

/// The Legendre transform `ψ^∨(x) = sup_y (x·y − ψ(y))` as a potential in its
/// own right, evaluated by damped Newton iteration from `start`.
pub struct LegendreDual<'a> {
    pub primal: &'a dyn HessianPotential,
    pub start: Vec<f64>,
}

impl<'a> LegendreDual<'a> {
    pub fn new(primal: &'a dyn HessianPotential, start: Vec<f64>) -> Self {
        Self { primal, start }
    }

    /// The primal point `y` with `∇ψ(y) = x`.
    pub fn solve(&self, x: &[f64]) -> Result<Vec<f64>> {
        let p = self.primal;
        let obj = |y: &[f64]| p.value(y).map(|v| v - dot(x, y));
        let mut y = self.start.clone();
        let mut f = obj(&y)?;
        let scale = 1.0 + x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for _ in 0..200 {
            let g: Vec<f64> = p.gradient(&y)?.iter().zip(x).map(|(a, b)| a - b).collect();
            if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= 1e-14 * scale {
                return Ok(y);
            }
            let h = p.hessian(&y)?;
            require_convex(&h)?;
            let step: Vec<f64> = mat_inverse(&h)?.matvec(&g).into_iter().map(|v| -v).collect();
            let ymax = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if step.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= 1e-14 * (1.0 + ymax) {
                let cand: Vec<f64> = y.iter().zip(&step).map(|(a, d)| a + d).collect();
                if p.contains(&cand) {
                    return Ok(cand);
                }
            }
            let slope = dot(&g, &step);
            let mut t = 1.0;
            loop {
                let cand: Vec<f64> = y.iter().zip(&step).map(|(a, d)| a + t * d).collect();
                if p.contains(&cand) {
                    if let Ok(fc) = obj(&cand) {
                        if fc <= f + 1e-4 * t * slope
                            || t * step.iter().fold(0.0f64, |m, v| m.max(v.abs())) < 1e-15 * scale
                        {
                            y = cand;
                            f = fc;
                            break;
                        }
                    }
                }
                t *= 0.5;
                if t < 1e-30 {
                    return Err(GeomError::Evaluation("Legendre Newton line search".into()));
                }
            }
        }
        let g: Vec<f64> = p.gradient(&y)?.iter().zip(x).map(|(a, b)| a - b).collect();
        if g.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= 1e-10 * scale {
            Ok(y)
        } else {
            Err(GeomError::ToleranceNotMet { estimate: y[0], error: crate::numkit::norm(&g) })
        }
    }
}

impl HessianPotential for LegendreDual<'_> {
    fn dim(&self) -> usize {
        self.primal.dim()
    }
    fn value(&self, x: &[f64]) -> Result<f64> {
        let y = self.solve(x)?;
        Ok(dot(x, &y) - self.primal.value(&y)?)
    }
    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.solve(x)
    }
    fn hessian(&self, x: &[f64]) -> Result<RMatrix> {
        mat_inverse(&self.primal.hessian(&self.solve(x)?)?)
    }
    fn contains(&self, x: &[f64]) -> bool {
        self.solve(x).is_ok()
    }
}
