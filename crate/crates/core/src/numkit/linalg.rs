use std::ops::{Add, Div, Index, IndexMut, Mul, Neg, Sub};

use serde::ser::{Serialize, SerializeSeq};

use super::C64;
use crate::error::{GeomError, Result};

/// Entry type for [`SquareMatrix`]: `f64` or `C64`.
pub trait Scalar:
    Copy
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn modulus(self) -> f64;
    fn conj(self) -> Self;
    fn from_real(x: f64) -> Self;
    fn is_finite(self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn conj(self) -> Self {
        self
    }
    fn from_real(x: f64) -> Self {
        x
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

impl Scalar for C64 {
    fn zero() -> Self {
        C64::new(0.0, 0.0)
    }
    fn one() -> Self {
        C64::new(1.0, 0.0)
    }
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn conj(self) -> Self {
        C64::conj(&self)
    }
    fn from_real(x: f64) -> Self {
        C64::new(x, 0.0)
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

/// Dense n×n matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SquareMatrix<T> {
    n: usize,
    data: Vec<T>,
}

// Serialized as a list of rows.
impl<T: Serialize> Serialize for SquareMatrix<T> {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = ser.serialize_seq(Some(self.n))?;
        for row in self.data.chunks(self.n.max(1)) {
            seq.serialize_element(row)?;
        }
        seq.end()
    }
}

pub type RMatrix = SquareMatrix<f64>;
pub type CMatrix = SquareMatrix<C64>;

impl<T: Scalar> SquareMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![T::zero(); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    /// Build from rows; panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        assert!(rows.iter().all(|r| r.len() == n), "matrix must be square");
        Self { n, data: rows.concat() }
    }

    pub fn diag(d: &[T]) -> Self {
        Self::from_fn(d.len(), |i, j| if i == j { d[i] } else { T::zero() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[T] {
        &self.data
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: T) -> Self {
        Self { n: self.n, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n);
        let n = self.n;
        Self::from_fn(n, |i, j| {
            let mut s = T::zero();
            for k in 0..n {
                s = s + self[(i, k)] * other[(k, j)];
            }
            s
        })
    }

    pub fn matvec(&self, v: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| {
                let mut s = T::zero();
                for (k, &vk) in v.iter().enumerate() {
                    s = s + self[(i, k)] * vk;
                }
                s
            })
            .collect()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::from_fn(self.n, |i, j| self[(i, j)] + other[(i, j)])
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::from_fn(self.n, |i, j| self[(i, j)] - other[(i, j)])
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|x| x.modulus().powi(2)).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.modulus()))
    }

    /// Largest |a_ij − conj(a_ji)|.
    pub fn hermitian_defect(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for j in 0..self.n {
                m = m.max((self[(i, j)] - self[(j, i)].conj()).modulus());
            }
        }
        m
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_defect() <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Symmetrized copy `(A + A*)/2`.
    pub fn hermitian_part(&self) -> Self {
        let half = T::from_real(0.5);
        Self::from_fn(self.n, |i, j| (self[(i, j)] + self[(j, i)].conj()) * half)
    }
}

impl RMatrix {
    pub fn to_complex(&self) -> CMatrix {
        CMatrix::from_fn(self.n, |i, j| C64::new(self[(i, j)], 0.0))
    }
}

impl<T> Index<(usize, usize)> for SquareMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.n + j]
    }
}

impl<T> IndexMut<(usize, usize)> for SquareMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.n + j]
    }
}

/// LU factorization with partial pivoting. Returns (packed LU, permutation, sign).
fn lu<T: Scalar>(m: &SquareMatrix<T>) -> (SquareMatrix<T>, Vec<usize>, f64, bool) {
    let n = m.n;
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign = 1.0;
    let mut singular = false;
    for k in 0..n {
        let mut p = k;
        let mut best = a[(k, k)].modulus();
        for i in k + 1..n {
            let v = a[(i, k)].modulus();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == 0.0 {
            singular = true;
            continue;
        }
        if p != k {
            for j in 0..n {
                a.data.swap(k * n + j, p * n + j);
            }
            perm.swap(k, p);
            sign = -sign;
        }
        let piv = a[(k, k)];
        for i in k + 1..n {
            let f = a[(i, k)] / piv;
            a[(i, k)] = f;
            for j in k + 1..n {
                let t = a[(k, j)];
                a[(i, j)] = a[(i, j)] - f * t;
            }
        }
    }
    (a, perm, sign, singular)
}

/// Determinant by LU with partial pivoting.
pub fn mat_det<T: Scalar>(m: &SquareMatrix<T>) -> T {
    let (a, _, sign, singular) = lu(m);
    if singular {
        return T::zero();
    }
    let mut d = T::from_real(sign);
    for k in 0..m.n {
        d = d * a[(k, k)];
    }
    d
}

/// Inverse by LU. Fails when |det| falls below `1e-14 · scale^n`,
/// where `scale` is the largest entry modulus.
pub fn mat_inverse<T: Scalar>(m: &SquareMatrix<T>) -> Result<SquareMatrix<T>> {
    let n = m.n;
    let (a, perm, sign, singular) = lu(m);
    let scale = m.max_abs().max(f64::MIN_POSITIVE);
    let mut det = T::from_real(sign);
    for k in 0..n {
        det = det * a[(k, k)];
    }
    let detn = if singular { 0.0 } else { det.modulus() };
    if detn <= 1e-14 * scale.powi(n as i32) {
        return Err(GeomError::Singular(detn));
    }
    let mut inv = SquareMatrix::zeros(n);
    for col in 0..n {
        // solve L U x = P e_col
        let mut x: Vec<T> = (0..n).map(|i| if perm[i] == col { T::one() } else { T::zero() }).collect();
        for i in 0..n {
            for k in 0..i {
                x[i] = x[i] - a[(i, k)] * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in i + 1..n {
                x[i] = x[i] - a[(i, k)] * x[k];
            }
            x[i] = x[i] / a[(i, i)];
        }
        for i in 0..n {
            inv[(i, col)] = x[i];
        }
    }
    Ok(inv)
}

/// Eigenvalues of a real symmetric matrix (cyclic Jacobi), ascending.
pub fn sym_eigenvalues(m: &RMatrix) -> Vec<f64> {
    let n = m.dim();
    let mut a = m.hermitian_part();
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[(i, j)] * a[(i, j)];
            }
        }
        if off <= 1e-30 * a.frobenius().powi(2).max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[(i, i)]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Eigenvalues of a Hermitian matrix, ascending, via its real 2n×2n
/// embedding (every eigenvalue appears twice there; one copy is kept).
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let n = m.dim();
    let h = m.hermitian_part();
    let real = RMatrix::from_fn(2 * n, |i, j| {
        let z = h[(i % n, j % n)];
        match (i < n, j < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    sym_eigenvalues(&real).chunks(2).map(|c| 0.5 * (c[0] + c[1])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_inverse() {
        let i3 = RMatrix::identity(3);
        assert_eq!(mat_inverse(&i3).unwrap(), i3);
    }

    #[test]
    fn diag_det() {
        assert_eq!(mat_det(&RMatrix::diag(&[2.0, 4.0])), 8.0);
    }

    #[test]
    fn spd_inverse_by_product() {
        let b = RMatrix::from_rows(&[vec![1.0, 0.3, -0.2], vec![0.5, 2.0, 0.1], vec![-0.4, 0.7, 1.5]]);
        let spd = b.transpose().matmul(&b).add(&RMatrix::identity(3));
        let inv = mat_inverse(&spd).unwrap();
        let e = spd.matmul(&inv).sub(&RMatrix::identity(3)).max_abs();
        assert!(e < 1e-12, "{e}");
    }

    #[test]
    fn pivoting_needed() {
        let m = RMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        assert_eq!(mat_det(&m), -1.0);
        assert_eq!(mat_inverse(&m).unwrap(), m);
    }

    #[test]
    fn singular_rejected() {
        let m = RMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(mat_inverse(&m), Err(GeomError::Singular(_))));
    }

    #[test]
    fn eigenvalues_of_known_matrices() {
        let m = RMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let ev = sym_eigenvalues(&m);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
        // [[2, i], [−i, 2]] has eigenvalues 1 and 3
        let h = CMatrix::from_rows(&[
            vec![C64::new(2.0, 0.0), C64::new(0.0, 1.0)],
            vec![C64::new(0.0, -1.0), C64::new(2.0, 0.0)],
        ]);
        let ev = hermitian_eigenvalues(&h);
        assert!((ev[0] - 1.0).abs() < 1e-13 && (ev[1] - 3.0).abs() < 1e-13, "{ev:?}");
    }

    #[test]
    fn complex_det() {
        let m = CMatrix::from_rows(&[
            vec![C64::new(1.0, 1.0), C64::new(0.0, 2.0)],
            vec![C64::new(3.0, 0.0), C64::new(1.0, -1.0)],
        ]);
        // (1+i)(1−i) − 2i·3 = 2 − 6i
        let d = mat_det(&m);
        assert!((d - C64::new(2.0, -6.0)).norm() < 1e-14);
        let inv = mat_inverse(&m).unwrap();
        assert!(m.matmul(&inv).sub(&CMatrix::identity(2)).max_abs() < 1e-14);
    }
}
