//! Small dense linear-algebra kit: products, least squares, symmetric
//! eigendecomposition, log-determinants and the Walsh–Hadamard transform.

mod eigen;
mod matrix;
mod solve;
mod walsh;

use thiserror::Error;

pub use eigen::{eig_sym, SymEigen};
pub use matrix::{matmul, ComplexMatrix, IntMatrix, Matrix, RealMatrix, Scalar};
pub use solve::{logabsdet, lstsq, rank, LeastSquares};
pub use walsh::fwht;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumError {
    #[error("shape {rows}x{cols} does not match {len} entries")]
    Shape { rows: usize, cols: usize, len: usize },

    #[error("ragged rows: expected {expected} columns, found {found}")]
    Ragged { expected: usize, found: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("matrix {0:?} is not square")]
    NotSquare((usize, usize)),

    #[error("matrix is not symmetric: |a[{row}][{col}] - a[{col}][{row}]| = {gap:e}")]
    NotSymmetric { row: usize, col: usize, gap: f64 },

    #[error("normal equations are singular at pivot {pivot} (|pivot| = {value:e})")]
    Singular { pivot: usize, value: f64 },

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),
}

pub type NumResult<T> = Result<T, NumError>;
