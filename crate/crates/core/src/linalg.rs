//! Small dense matrices over real or complex scalars.
//!
//! Everything here is sized for the objects the pipeline actually touches:
//! 14x14 transduction maps, 2n x 2n covariance matrices, and per-pair
//! mode-qubit propagators of a few hundred rows. No BLAS.

use std::ops::{Index, IndexMut};

use num_traits::NumAssign;

use crate::scalar::{Cx, Real};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

pub type RMatrix<T> = Matrix<T>;
pub type CMatrix<T> = Matrix<Cx<T>>;

impl<S: Copy + NumAssign> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![S::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = S::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> S) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<S>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[S] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [S] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map<U: Copy + NumAssign>(&self, f: impl Fn(S) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            let out_row = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == S::zero() {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[S]) -> Vec<S> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(S::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (o, &r) in out.data.iter_mut().zip(&rhs.data) {
            *o += r;
        }
        out
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        let mut out = self.clone();
        for (o, &r) in out.data.iter_mut().zip(&rhs.data) {
            *o -= r;
        }
        out
    }

    pub fn scale(&self, s: S) -> Self {
        self.map(|x| x * s)
    }

    pub fn trace(&self) -> S {
        (0..self.rows.min(self.cols)).fold(S::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn kron(&self, rhs: &Self) -> Self {
        let (r, c) = (self.rows * rhs.rows, self.cols * rhs.cols);
        Self::from_fn(r, c, |i, j| {
            self[(i / rhs.rows, j / rhs.cols)] * rhs[(i % rhs.rows, j % rhs.cols)]
        })
    }

    /// Sub-matrix picking the given rows and columns.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &S {
        &self.data[i * self.cols + j]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut S {
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Real> Matrix<T> {
    /// Induced infinity norm (max absolute row sum).
    pub fn norm_inf(&self) -> T {
        (0..self.rows)
            .map(|i| self.row(i).iter().fold(T::zero(), |a, x| a + x.abs()))
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.abs()))
    }

    pub fn to_complex(&self) -> CMatrix<T> {
        self.map(|x| Cx::new(x, T::zero()))
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Option<Self> {
        assert!(self.is_square(), "inverse of non-square matrix");
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        for col in 0..n {
            let pivot = (col..n).max_by(|&x, &y| {
                a[(x, col)]
                    .abs()
                    .partial_cmp(&a[(y, col)].abs())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })?;
            if a[(pivot, col)].abs() <= T::min_positive_value() {
                return None;
            }
            if pivot != col {
                for j in 0..n {
                    a.data.swap(pivot * n + j, col * n + j);
                    inv.data.swap(pivot * n + j, col * n + j);
                }
            }
            let d = a[(col, col)];
            for j in 0..n {
                a[(col, j)] = a[(col, j)] / d;
                inv[(col, j)] = inv[(col, j)] / d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == T::zero() {
                    continue;
                }
                for j in 0..n {
                    let (ac, ic) = (a[(col, j)], inv[(col, j)]);
                    a[(r, j)] = a[(r, j)] - f * ac;
                    inv[(r, j)] = inv[(r, j)] - f * ic;
                }
            }
        }
        Some(inv)
    }

    pub fn is_symmetric(&self, tol: T) -> bool {
        self.is_square()
            && (0..self.rows)
                .all(|i| (0..i).all(|j| (self[(i, j)] - self[(j, i)]).abs() <= tol))
    }
}

impl<T: Real> Matrix<Cx<T>> {
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Induced 1-norm (max absolute column sum).
    pub fn norm_one(&self) -> T {
        (0..self.cols)
            .map(|j| (0..self.rows).fold(T::zero(), |a, i| a + self[(i, j)].norm()))
            .fold(T::zero(), T::max)
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, x| m.max(x.norm()))
    }

    pub fn real_part(&self) -> Matrix<T> {
        self.map(|z| z.re)
    }

    pub fn imag_part(&self) -> Matrix<T> {
        self.map(|z| z.im)
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..=i).all(|j| (self[(i, j)] - self[(j, i)].conj()).norm() <= tol))
    }

    /// Matrix exponential by scaling and squaring with a Taylor core.
    pub fn expm(&self) -> Self {
        assert!(self.is_square(), "expm of non-square matrix");
        let n = self.rows;
        let norm = self.norm_one();
        let mut squarings = 0u32;
        if norm > T::lit(0.25) {
            squarings = (norm / T::lit(0.25)).log2().ceil().to_u32().unwrap_or(0);
        }
        let scale = T::lit(2.0).powi(-(squarings as i32));
        let a = self.scale(Cx::new(scale, T::zero()));
        let mut result = Self::identity(n);
        let mut term = Self::identity(n);
        let eps = T::epsilon();
        for k in 1..64 {
            term = term.matmul(&a).scale(Cx::new(T::one() / T::from_usize_lossy(k), T::zero()));
            result = result.add(&term);
            if term.norm_one() <= eps * result.norm_one() {
                break;
            }
        }
        for _ in 0..squarings {
            result = result.matmul(&result);
        }
        result
    }

    /// Eigenvalues of a Hermitian matrix, ascending.
    ///
    /// Uses the real symmetric embedding `[[A, -B], [B, A]]` of `A + iB`,
    /// whose spectrum is that of the Hermitian matrix with every eigenvalue
    /// doubled in multiplicity.
    pub fn hermitian_eigenvalues(&self) -> Vec<T> {
        assert!(self.is_square());
        let n = self.rows;
        let emb = Matrix::from_fn(2 * n, 2 * n, |i, j| {
            let z = self[(i % n, j % n)];
            match (i < n, j < n) {
                (true, true) | (false, false) => z.re,
                (true, false) => -z.im,
                (false, true) => z.im,
            }
        });
        let mut ev = symmetric_eigenvalues(&emb);
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        ev.into_iter().step_by(2).collect()
    }
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
pub fn symmetric_eigenvalues<T: Real>(m: &Matrix<T>) -> Vec<T> {
    assert!(m.is_square());
    let n = m.rows();
    let mut a = m.clone();
    let off = |a: &Matrix<T>| {
        let mut s = T::zero();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s = s + a[(i, j)] * a[(i, j)];
                }
            }
        }
        s
    };
    let scale = a.as_slice().iter().fold(T::zero(), |s, x| s + *x * *x);
    let tol = T::epsilon() * T::epsilon() * scale.max(T::min_positive_value());
    for _sweep in 0..100 {
        if off(&a) <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == T::zero() {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (T::lit(2.0) * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let c = T::one() / (t * t + T::one()).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
            }
        }
    }
    (0..n).map(|i| a[(i, i)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::cx;

    #[test]
    fn inverse_of_known_matrix() {
        let m = Matrix::from_rows(2, 2, vec![4.0_f64, 7.0, 2.0, 6.0]);
        let inv = m.inverse().unwrap();
        let id = m.matmul(&inv);
        assert!(id.sub(&Matrix::identity(2)).max_abs() < 1e-14);
        assert!((inv[(0, 0)] - 0.6).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_has_no_inverse() {
        let m = Matrix::from_rows(2, 2, vec![1.0, 2.0, 2.0, 4.0]);
        assert!(m.inverse().is_none());
    }

    #[test]
    fn expm_of_rotation_generator() {
        // exp(-i theta X) = cos(theta) I - i sin(theta) X
        let theta = 2.7_f64;
        let g = Matrix::from_rows(
            2,
            2,
            vec![cx(0.0, 0.0), cx(0.0, -theta), cx(0.0, -theta), cx(0.0, 0.0)],
        );
        let u = g.expm();
        assert!((u[(0, 0)] - cx(theta.cos(), 0.0)).norm() < 1e-14);
        assert!((u[(0, 1)] - cx(0.0, -theta.sin())).norm() < 1e-14);
    }

    #[test]
    fn jacobi_matches_closed_form() {
        let m = Matrix::from_rows(2, 2, vec![2.0_f64, 1.0, 1.0, 2.0]);
        let mut ev = symmetric_eigenvalues(&m);
        ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
    }

    #[test]
    fn hermitian_spectrum_of_pauli_y() {
        let y = Matrix::from_rows(
            2,
            2,
            vec![cx(0.0, 0.0), cx(0.0, -1.0), cx(0.0, 1.0), cx(0.0, 0.0)],
        );
        let ev: Vec<f64> = y.hermitian_eigenvalues();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn kron_shapes_and_values() {
        let a = Matrix::from_rows(2, 2, vec![1.0, 2.0, 3.0, 4.0]);
        let b = Matrix::identity(2);
        let k = a.kron(&b);
        assert_eq!((k.rows(), k.cols()), (4, 4));
        assert_eq!(k[(2, 0)], 3.0);
        assert_eq!(k[(3, 1)], 3.0);
        assert_eq!(k[(2, 1)], 0.0);
    }
}
