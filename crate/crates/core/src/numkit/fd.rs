//! Centered finite-difference oracles.
//!
//! First derivatives use the step `1e-5·(1+|x|)` by default. Second and
//! third derivatives use wider steps with fourth-order stencils, since at
//! `h = 1e-5` roundoff (`ε/h²`) would swamp the second-order signal.

use super::{CMatrix, RMatrix, C64};
use crate::error::{GeomError, Result};

/// Default first-derivative step at coordinate value `x`.
pub fn default_step(x: f64) -> f64 {
    1e-5 * (1.0 + x.abs())
}

fn second_step(x: f64) -> f64 {
    1e-3 * (1.0 + x.abs())
}

fn check(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(GeomError::Evaluation(what.to_string()))
    }
}

/// Central-difference gradient. `h = None` picks [`default_step`] per coordinate.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: Option<f64>) -> Result<Vec<f64>> {
    let mut p = x.to_vec();
    let mut g = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let hi = h.unwrap_or_else(|| default_step(x[i]));
        p[i] = x[i] + hi;
        let fp = check(f(&p), "gradient stencil")?;
        p[i] = x[i] - hi;
        let fm = check(f(&p), "gradient stencil")?;
        p[i] = x[i];
        g.push((fp - fm) / (2.0 * hi));
    }
    Ok(g)
}

/// Jacobian `J[a][i] = ∂F_a/∂x_i` of a vector field, central differences.
pub fn fd_jacobian(f: impl Fn(&[f64]) -> Vec<f64>, x: &[f64], h: Option<f64>) -> Result<Vec<Vec<f64>>> {
    let m = x.len();
    let mut p = x.to_vec();
    let mut cols = Vec::with_capacity(m);
    for i in 0..m {
        let hi = h.unwrap_or_else(|| default_step(x[i]));
        p[i] = x[i] + hi;
        let fp = f(&p);
        p[i] = x[i] - hi;
        let fm = f(&p);
        p[i] = x[i];
        let col: Vec<f64> = fp.iter().zip(&fm).map(|(a, b)| (a - b) / (2.0 * hi)).collect();
        for v in &col {
            check(*v, "jacobian stencil")?;
        }
        cols.push(col);
    }
    let rows = cols.first().map_or(0, |c| c.len());
    Ok((0..rows).map(|a| (0..m).map(|i| cols[i][a]).collect()).collect())
}

const D1: [(f64, f64); 4] = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];

/// Real Hessian with fourth-order centered stencils.
/// `h = None` picks `1e-3·(1+|x_i|)` per coordinate.
pub fn fd_hessian(f: impl Fn(&[f64]) -> f64, x: &[f64], h: Option<f64>) -> Result<RMatrix> {
    let m = x.len();
    let steps: Vec<f64> = x.iter().map(|&xi| h.unwrap_or_else(|| second_step(xi))).collect();
    let mut p = x.to_vec();
    let f0 = check(f(&p), "hessian stencil")?;
    let mut hess = RMatrix::zeros(m);
    for i in 0..m {
        let hi = steps[i];
        let mut acc = -30.0 * f0;
        for (k, w) in [(-2.0, -1.0), (-1.0, 16.0), (1.0, 16.0), (2.0, -1.0)] {
            p[i] = x[i] + k * hi;
            acc += w * check(f(&p), "hessian stencil")?;
        }
        p[i] = x[i];
        hess[(i, i)] = acc / (12.0 * hi * hi);
        for j in i + 1..m {
            let hj = steps[j];
            let mut acc = 0.0;
            for (ki, wi) in D1 {
                for (kj, wj) in D1 {
                    p[i] = x[i] + ki * hi;
                    p[j] = x[j] + kj * hj;
                    acc += wi * wj * check(f(&p), "hessian stencil")?;
                }
            }
            p[i] = x[i];
            p[j] = x[j];
            let v = acc / (144.0 * hi * hj);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(hess)
}

/// `∂²F/∂z_i∂z̄_j` of a real function on Cⁿ.
///
/// With `z = x + iy` this is `¼[(F_xx + F_yy) + i(F_xy − F_yx)]` on the
/// corresponding index pair.
pub fn fd_ddbar(f: impl Fn(&[C64]) -> f64, z: &[C64], h: Option<f64>) -> Result<CMatrix> {
    let n = z.len();
    let mut flat = Vec::with_capacity(2 * n);
    flat.extend(z.iter().map(|w| w.re));
    flat.extend(z.iter().map(|w| w.im));
    let g = |v: &[f64]| {
        let zz: Vec<C64> = (0..n).map(|k| C64::new(v[k], v[n + k])).collect();
        f(&zz)
    };
    let hr = fd_hessian(g, &flat, h)?;
    let m = CMatrix::from_fn(n, |i, j| {
        C64::new(0.25 * (hr[(i, j)] + hr[(n + i, n + j)]), 0.25 * (hr[(i, n + j)] - hr[(n + i, j)]))
    });
    Ok(m)
}

/// Fourth-order centered first derivative of a scalar function.
pub fn fd_d1(f: impl Fn(f64) -> f64, x: f64, h: Option<f64>) -> f64 {
    let h = h.unwrap_or_else(|| second_step(x));
    D1.iter().map(|&(k, w)| w * f(x + k * h)).sum::<f64>() / (12.0 * h)
}

/// Fourth-order centered second derivative.
pub fn fd_d2(f: impl Fn(f64) -> f64, x: f64, h: Option<f64>) -> f64 {
    let h = h.unwrap_or_else(|| second_step(x));
    (-f(x - 2.0 * h) + 16.0 * f(x - h) - 30.0 * f(x) + 16.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h * h)
}

/// Five-point centered third derivative.
pub fn fd_d3(f: impl Fn(f64) -> f64, x: f64, h: Option<f64>) -> f64 {
    let h = h.unwrap_or_else(|| second_step(x));
    (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h)
}

/// Strictly increasing nodes with at least five points.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid1D {
    nodes: Vec<f64>,
}

impl Grid1D {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 5 {
            return Err(GeomError::Config("grid needs at least 5 nodes".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) || nodes.iter().any(|x| !x.is_finite()) {
            return Err(GeomError::Config("grid nodes must be finite and strictly increasing".into()));
        }
        Ok(Self { nodes })
    }

    pub fn uniform(a: f64, b: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(GeomError::Config("grid needs at least 5 nodes".into()));
        }
        let h = (b - a) / (n - 1) as f64;
        Self::new((0..n).map(|i| a + h * i as f64).collect())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> Vec<f64> {
        self.nodes.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn min_spacing(&self) -> f64 {
        self.spacing().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Derivatives of order 0..=2 of grid values at every node, using
    /// five-point windows (centered in the interior, one-sided at the ends).
    pub fn derivatives(&self, f: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.nodes.len();
        let mut d1 = vec![0.0; n];
        let mut d2 = vec![0.0; n];
        for i in 0..n {
            let start = i.saturating_sub(2).min(n - 5);
            let win = &self.nodes[start..start + 5];
            let w = fornberg(self.nodes[i], win, 2);
            for k in 0..5 {
                d1[i] += w[1][k] * f[start + k];
                d2[i] += w[2][k] * f[start + k];
            }
        }
        (d1, d2)
    }
}

/// Fornberg's recursion for finite-difference weights of derivative orders
/// 0..=m at `x0` on arbitrary nodes. Returns `w[order][node]`.
fn fornberg(x0: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; m + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}
