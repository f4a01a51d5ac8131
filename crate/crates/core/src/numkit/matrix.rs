use std::fmt;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use rayon::prelude::*;

use super::{NumError, NumResult};

/// Element type of a dense [`Matrix`].
pub trait Scalar:
    Copy
    + fmt::Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn zero() -> Self;
    fn one() -> Self;
    fn is_finite(&self) -> bool;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn one() -> Self {
        Complex64::new(1.0, 0.0)
    }
    fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

impl Scalar for i64 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn is_finite(&self) -> bool {
        true
    }
}

/// Dense row-major matrix.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type RealMatrix = Matrix<f64>;
pub type ComplexMatrix = Matrix<Complex64>;
pub type IntMatrix = Matrix<i64>;

impl<T: Scalar> Matrix<T> {
    /// Wraps row-major `data`; rejects a shape mismatch or non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> NumResult<Self> {
        if rows * cols != data.len() {
            return Err(NumError::Shape {
                rows,
                cols,
                len: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(NumError::NonFinite {
                row: index / cols.max(1),
                col: index % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = T::one();
        }
        m
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

    pub fn from_rows(rows: &[Vec<T>]) -> NumResult<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != cols) {
            return Err(NumError::Ragged {
                expected: cols,
                found: bad.len(),
            });
        }
        Self::new(rows.len(), cols, rows.concat())
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

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.data[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.data.chunks(self.cols.max(1)).map(<[T]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[T]) -> NumResult<Vec<T>> {
        if x.len() != self.cols {
            return Err(NumError::DimensionMismatch {
                left: self.shape(),
                right: (x.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(T::zero(), |acc, (&a, &b)| acc + a * b)
            })
            .collect())
    }
}

impl<T: Scalar> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Dense product `a · b`.
pub fn matmul<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> NumResult<Matrix<T>> {
    if a.cols != b.rows {
        return Err(NumError::DimensionMismatch {
            left: a.shape(),
            right: b.shape(),
        });
    }
    let (m, k, n) = (a.rows, a.cols, b.cols);
    let mut out = vec![T::zero(); m * n];
    // i-k-j order keeps the inner loop contiguous in both `b` and `out`.
    out.par_chunks_mut(n.max(1)).enumerate().for_each(|(i, row)| {
        for p in 0..k {
            let aik = a.data[i * k + p];
            let brow = &b.data[p * n..(p + 1) * n];
            for (o, &bv) in row.iter_mut().zip(brow) {
                *o = *o + aik * bv;
            }
        }
    });
    Ok(Matrix {
        rows: m,
        cols: n,
        data: out,
    })
}

impl RealMatrix {
    /// Largest absolute entrywise difference; `None` on a shape mismatch.
    pub fn max_abs_diff(&self, other: &Self) -> Option<f64> {
        (self.shape() == other.shape()).then(|| {
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max)
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn scale(&self, factor: f64) -> Self {
        self.map(|v| v * factor)
    }

    /// `AᵀA` computed as a Gram matrix of the columns.
    ///
    /// Works on 4×4 tiles of column pairs so each streamed column feeds four
    /// dot products; only tiles on or above the diagonal are computed.
    pub fn gram(&self) -> Self {
        let t = self.transpose();
        let n = self.cols;
        let tiles = n.div_ceil(TILE);
        let mut out = vec![0.0; n * n];
        out.par_chunks_mut((n * TILE).max(1))
            .enumerate()
            .for_each(|(bi, band)| {
                let i0 = bi * TILE;
                let ih = TILE.min(n - i0);
                for bj in bi..tiles {
                    let j0 = bj * TILE;
                    let jh = TILE.min(n - j0);
                    let block = tile_dots(&t, i0, ih, j0, jh);
                    for di in 0..ih {
                        for dj in 0..jh {
                            band[di * n + j0 + dj] = block[di][dj];
                        }
                    }
                }
            });
        for i in 0..n {
            for j in 0..i {
                out[i * n + j] = out[j * n + i];
            }
        }
        Matrix {
            rows: n,
            cols: n,
            data: out,
        }
    }
}

const TILE: usize = 4;

/// Dot products between rows `i0..i0+ih` and `j0..j0+jh` of `t`.
fn tile_dots(t: &RealMatrix, i0: usize, ih: usize, j0: usize, jh: usize) -> [[f64; TILE]; TILE] {
    let mut out = [[0.0; TILE]; TILE];
    if ih < TILE || jh < TILE {
        for di in 0..ih {
            for dj in 0..jh {
                out[di][dj] = dot(t.row(i0 + di), t.row(j0 + dj));
            }
        }
        return out;
    }
    let a: [&[f64]; TILE] = std::array::from_fn(|k| t.row(i0 + k));
    let b: [&[f64]; TILE] = std::array::from_fn(|k| t.row(j0 + k));
    let len = a[0].len();
    let mut acc = [[[0.0f64; 2]; TILE]; TILE];
    let pairs = len / 2;
    for p in 0..pairs {
        let k = 2 * p;
        let av: [[f64; 2]; TILE] = std::array::from_fn(|r| [a[r][k], a[r][k + 1]]);
        let bv: [[f64; 2]; TILE] = std::array::from_fn(|r| [b[r][k], b[r][k + 1]]);
        for r in 0..TILE {
            for c in 0..TILE {
                acc[r][c][0] += av[r][0] * bv[c][0];
                acc[r][c][1] += av[r][1] * bv[c][1];
            }
        }
    }
    for r in 0..TILE {
        for c in 0..TILE {
            let tail: f64 = (2 * pairs..len).map(|k| a[r][k] * b[c][k]).sum();
            out[r][c] = acc[r][c][0] + acc[r][c][1] + tail;
        }
    }
    out
}

/// Dot product with independent lanes so the compiler can vectorise it.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 8];
    let (ca, cb) = (a.chunks_exact(8), b.chunks_exact(8));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for l in 0..8 {
            acc[l] += x[l] * y[l];
        }
    }
    acc.iter().sum::<f64>() + tail
}

impl ComplexMatrix {
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn max_abs_diff(&self, other: &Self) -> Option<f64> {
        (self.shape() == other.shape()).then(|| {
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max)
        })
    }

    /// `‖U†U − I‖max`.
    pub fn unitarity_defect(&self) -> NumResult<f64> {
        if !self.is_square() {
            return Err(NumError::NotSquare(self.shape()));
        }
        let product = matmul(&self.adjoint(), self)?;
        Ok(product
            .max_abs_diff(&Self::identity(self.rows))
            .expect("same shape"))
    }

    /// Largest modulus among the off-diagonal entries.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    worst = worst.max(self.get(i, j).norm());
                }
            }
        }
        worst
    }

    pub fn diagonal(&self) -> Vec<Complex64> {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).collect()
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = other.shape();
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self.get(i / r2, j / c2) * other.get(i % r2, j % c2)
        })
    }
}

impl IntMatrix {
    pub fn kron(&self, other: &Self) -> Self {
        let (r2, c2) = other.shape();
        Self::from_fn(self.rows * r2, self.cols * c2, |i, j| {
            self.get(i / r2, j / c2) * other.get(i % r2, j % c2)
        })
    }

    pub fn to_real(&self) -> RealMatrix {
        self.map(|v| v as f64)
    }
}
