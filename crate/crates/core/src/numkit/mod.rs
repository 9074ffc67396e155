//! Small numerical kernel: dense linear algebra, finite-difference oracles,
//! adaptive quadrature, monotone inversion and cubic roots.

mod fd;
mod linalg;
mod quad;
mod roots;

pub use fd::{default_step, fd_d1, fd_d2, fd_d3, fd_ddbar, fd_gradient, fd_hessian, fd_jacobian, Grid1D};
pub use linalg::{
    hermitian_eigenvalues, mat_det, mat_inverse, sym_eigenvalues, CMatrix, RMatrix, Scalar, SquareMatrix,
};
pub use quad::{quad_adaptive, quad_adaptive_default};
pub use roots::{invert_monotone, solve_cubic};

pub use num_complex::Complex64 as C64;

/// `i`.
pub const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Shorthand constructor.
#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Euclidean norm of a real vector.
pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Σ|z|² for a complex vector.
pub fn cnorm_sqr(z: &[C64]) -> f64 {
    z.iter().map(|w| w.norm_sqr()).sum()
}
