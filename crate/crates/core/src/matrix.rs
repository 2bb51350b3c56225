//! Dense row-major matrices over any element type.

use std::fmt;

use crate::dyadic::Dyadic;
use crate::element::{Element, Linear};
use crate::error::{FmmError, Result};

#[derive(Clone, PartialEq, Debug)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Scheme coefficient matrix (`L`, `R`, `P` and change-of-basis factors).
pub type CoeffMatrix = Matrix<Dyadic>;

impl<T> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(FmmError::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Clone> Matrix<T> {
    /// Row-major vectorization: `v[i * cols + j] = a[i][j]`.
    pub fn vectorize(&self) -> Vec<T> {
        self.data.clone()
    }

    pub fn devectorize(v: &[T], rows: usize, cols: usize) -> Result<Self> {
        Matrix::from_vec(rows, cols, v.to_vec())
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn block(&self, r0: usize, c0: usize, h: usize, w: usize) -> Self {
        Matrix::from_fn(h, w, |i, j| self.get(r0 + i, c0 + j).clone())
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Matrix<T>) {
        for i in 0..b.rows {
            let dst = (r0 + i) * self.cols + c0;
            self.data[dst..dst + b.cols].clone_from_slice(b.row(i));
        }
    }

    /// Splits into a `p x q` grid of equal blocks, returned in row-major order.
    pub fn split_grid(&self, p: usize, q: usize) -> Vec<Matrix<T>> {
        assert!(self.rows.is_multiple_of(p) && self.cols.is_multiple_of(q), "grid does not divide matrix");
        let (h, w) = (self.rows / p, self.cols / q);
        let mut out = Vec::with_capacity(p * q);
        for bi in 0..p {
            for bj in 0..q {
                out.push(self.block(bi * h, bj * w, h, w));
            }
        }
        out
    }
}

impl<T: Element> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::from_fn(rows, cols, |_, _| T::zero())
    }

    pub fn identity(n: usize) -> Self {
        Matrix::from_fn(n, n, |i, j| if i == j { T::one() } else { T::zero() })
    }

    /// Elementary matrix with a single one at `(i, j)`.
    pub fn elementary(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Matrix::zeros(rows, cols);
        m.set(i, j, T::one());
        m
    }

    /// Assembles a `p x q` grid of equal blocks given in row-major order.
    pub fn from_grid(blocks: &[Matrix<T>], p: usize, q: usize) -> Self {
        assert_eq!(blocks.len(), p * q);
        let (h, w) = blocks[0].shape();
        let mut out = Matrix::zeros(h * p, w * q);
        for (idx, b) in blocks.iter().enumerate() {
            out.set_block((idx / q) * h, (idx % q) * w, b);
        }
        out
    }

    /// Zero-pads (or crops) to `rows x cols`, keeping the leading block.
    pub fn resized(&self, rows: usize, cols: usize) -> Self {
        if (rows, cols) == self.shape() {
            return self.clone();
        }
        Matrix::from_fn(rows, cols, |i, j| {
            if i < self.rows && j < self.cols {
                self.get(i, j).clone()
            } else {
                T::zero()
            }
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Element::is_zero)
    }

    pub fn nnz(&self) -> usize {
        self.data.iter().filter(|x| !x.is_zero()).count()
    }

    /// Matrix-vector product `self * v`.
    pub fn mul_vec(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.cols {
            return Err(FmmError::Shape(format!(
                "vector of length {} for a {}x{} matrix",
                v.len(),
                self.rows,
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                let mut acc = T::zero();
                for (a, x) in self.row(i).iter().zip(v) {
                    if !a.is_zero() {
                        acc.mul_add_assign(a, x);
                    }
                }
                acc
            })
            .collect())
    }
}

impl Matrix<f64> {
    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Matrix<f64>) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.abs()).fold(0.0, f64::max)
    }

    /// Induced infinity norm (maximum absolute row sum).
    pub fn norm_inf(&self) -> f64 {
        (0..self.rows)
            .map(|i| self.row(i).iter().map(|a| a.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Frobenius norm, an upper bound on the spectral norm.
    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }
}

impl<T: Linear> Matrix<T> {
    fn zip_with(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Self {
        assert_eq!(self.shape(), other.shape(), "elementwise op on mismatched shapes");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| f(a, b)).collect(),
        }
    }
}

impl<T: Linear> Linear for Matrix<T> {
    fn add(&self, other: &Self) -> Self {
        self.zip_with(other, T::add)
    }
    fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, T::sub)
    }
    fn neg(&self) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(T::neg).collect(),
        }
    }
    fn scale_pow2(&self, e: i64) -> Self {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| x.scale_pow2(e)).collect(),
        }
    }
}

/// Classical triple loop; each entry accumulates `a[i][k] * b[k][j]` in
/// increasing `k` starting from zero.
pub fn classical_multiply<T: Element>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    if a.cols != b.rows {
        return Err(FmmError::Shape(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let (m, k, n) = (a.rows, a.cols, b.cols);
    let mut c: Matrix<T> = Matrix::zeros(m, n);
    // i-k-j loop order keeps the per-entry summation order in k
    for i in 0..m {
        let crow = &mut c.data[i * n..(i + 1) * n];
        for kk in 0..k {
            let aik = &a.data[i * k + kk];
            if aik.is_zero() {
                continue;
            }
            let brow = &b.data[kk * n..(kk + 1) * n];
            for (cij, bkj) in crow.iter_mut().zip(brow) {
                cij.mul_add_assign(aik, bkj);
            }
        }
    }
    Ok(c)
}

impl<T: fmt::Display> fmt::Display for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|x| x.to_string()).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}
