// Copyright 2026 The sps-purity Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense row-major matrices.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Index, IndexMut};

use crate::C64;

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type CMatrix = Matrix<C64>;
pub type RMatrix = Matrix<f64>;

impl<T: Copy + Default> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::default(); rows * cols],
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Panics if `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length mismatch");
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn map<U: Copy + Default>(&self, f: impl Fn(T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

impl CMatrix {
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    /// Elementwise real part.
    pub fn re(&self) -> RMatrix {
        self.map(|z| z.re)
    }

    /// Largest elementwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl RMatrix {
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| libm::fabs(a - b))
            .fold(0.0, f64::max)
    }
}

/// `a * b` through the blocked complex kernel.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.cols, b.rows, "matmul shape mismatch");
    let (m, k, n) = (a.rows, a.cols, b.cols);
    let mut c = CMatrix::zeros(m, n);
    if m == 0 || n == 0 || k == 0 {
        return c;
    }
    // SAFETY: Complex<f64> is repr(C) with layout identical to [f64; 2],
    // and the strides describe the row-major buffers owned above.
    unsafe {
        matrixmultiply::zgemm(
            matrixmultiply::CGemmOption::Standard,
            matrixmultiply::CGemmOption::Standard,
            m,
            k,
            n,
            [1.0, 0.0],
            a.data.as_ptr() as *const [f64; 2],
            k as isize,
            1,
            b.data.as_ptr() as *const [f64; 2],
            n as isize,
            1,
            [0.0, 0.0],
            c.data.as_mut_ptr() as *mut [f64; 2],
            n as isize,
            1,
        );
    }
    c
}

/// Weighted Gram matrix `G[i][j] = sum_c conj(a[i][c]) w[c] a[j][c]`.
pub fn weighted_gram(a: &CMatrix, w: &[f64]) -> CMatrix {
    assert_eq!(a.cols, w.len());
    let mut left = a.conj();
    let cols = a.cols;
    for i in 0..a.rows {
        let r = left.row_mut(i);
        for c in 0..cols {
            r[c] *= libm::sqrt(w[c]);
        }
    }
    let right = left.adjoint();
    matmul(&left, &right)
}

/// `sum_c m[i][c] w[c] v[c]` for every row `i`.
pub fn weighted_matvec(m: &CMatrix, w: &[f64], v: &[C64]) -> Vec<C64> {
    assert_eq!(m.cols, w.len());
    assert_eq!(m.cols, v.len());
    let wv: Vec<C64> = v.iter().zip(w).map(|(z, &wi)| z * wi).collect();
    (0..m.rows)
        .map(|i| m.row(i).iter().zip(&wv).map(|(a, b)| a * b).sum())
        .collect()
}

/// Weighted inner product `sum_c conj(a[c]) w[c] b[c]`.
pub fn weighted_dot(a: &[C64], w: &[f64], b: &[C64]) -> C64 {
    a.iter()
        .zip(w)
        .zip(b)
        .map(|((x, &wi), y)| x.conj() * y * wi)
        .sum()
}

/// Weighted squared norm `sum_c w[c] |a[c]|^2`.
pub fn weighted_norm_sqr(a: &[C64], w: &[f64]) -> f64 {
    a.iter().zip(w).map(|(x, &wi)| x.norm_sqr() * wi).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(rows: usize, cols: usize, seed: f64) -> CMatrix {
        CMatrix::from_fn(rows, cols, |i, j| {
            let x = seed + 0.37 * i as f64 - 0.11 * j as f64;
            C64::new(libm::sin(x), libm::cos(1.3 * x))
        })
    }

    #[test]
    fn matmul_matches_naive() {
        let a = sample(7, 5, 0.2);
        let b = sample(5, 9, 1.1);
        let c = matmul(&a, &b);
        let naive = CMatrix::from_fn(7, 9, |i, j| (0..5).map(|k| a[(i, k)] * b[(k, j)]).sum());
        assert!(c.max_abs_diff(&naive) < 1e-13);
    }

    #[test]
    fn weighted_gram_matches_naive() {
        let a = sample(6, 4, -0.3);
        let w = [0.5, 1.0, 0.25, 2.0];
        let g = weighted_gram(&a, &w);
        let naive = CMatrix::from_fn(6, 6, |i, j| {
            (0..4).map(|c| a[(i, c)].conj() * w[c] * a[(j, c)]).sum()
        });
        assert!(g.max_abs_diff(&naive) < 1e-13);
        assert!(g.max_abs_diff(&g.adjoint()) < 1e-13);
    }
}
