use super::{NumError, NumResult, RealMatrix};
use crate::tol;

/// LU factorisation with partial pivoting, stored compactly.
#[derive(Debug, Clone)]
struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
}

impl Lu {
    /// Factors a square matrix; `min_pivot` is the smallest admissible pivot magnitude.
    fn factor(a: &RealMatrix, min_pivot: f64) -> NumResult<Self> {
        if !a.is_square() {
            return Err(NumError::NotSquare(a.shape()));
        }
        let n = a.rows();
        let mut lu = a.as_slice().to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, value) = (k..n)
                .map(|i| (i, lu[i * n + k].abs()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if value < min_pivot {
                return Err(NumError::Singular { pivot: k, value });
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let factor = lu[i * n + k] / pivot;
                lu[i * n + k] = factor;
                if factor != 0.0 {
                    for j in k + 1..n {
                        lu[i * n + j] -= factor * lu[k * n + j];
                    }
                }
            }
        }
        Ok(Self { n, lu, perm })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }
}

/// Least-squares solver that factors the normal equations `AᵀA` once and
/// then solves for any number of right-hand sides.
#[derive(Debug, Clone)]
pub struct LeastSquares {
    at: RealMatrix,
    lu: Lu,
}

impl LeastSquares {
    /// Fails with [`NumError::Singular`] if a pivot of `AᵀA` falls below [`tol::PIVOT`].
    pub fn new(a: &RealMatrix) -> NumResult<Self> {
        Self::from_gram(a, &a.gram())
    }

    /// Reuses an already computed `AᵀA`.
    pub fn from_gram(a: &RealMatrix, gram: &RealMatrix) -> NumResult<Self> {
        if gram.shape() != (a.cols(), a.cols()) {
            return Err(NumError::DimensionMismatch {
                left: a.shape(),
                right: gram.shape(),
            });
        }
        let lu = Lu::factor(gram, tol::PIVOT)?;
        Ok(Self {
            at: a.transpose(),
            lu,
        })
    }

    pub fn solve(&self, y: &[f64]) -> NumResult<Vec<f64>> {
        let rhs = self.at.mul_vec(y)?;
        Ok(self.lu.solve(&rhs))
    }
}

/// `argmin ‖Ax − y‖₂` through the normal equations.
pub fn lstsq(a: &RealMatrix, y: &[f64]) -> NumResult<Vec<f64>> {
    LeastSquares::new(a)?.solve(y)
}

/// `ln |det A|`, or `−∞` when elimination meets an exactly vanishing pivot column.
pub fn logabsdet(a: &RealMatrix) -> NumResult<f64> {
    if !a.is_square() {
        return Err(NumError::NotSquare(a.shape()));
    }
    if a.rows() == 0 {
        return Ok(0.0);
    }
    let floor = a.max_abs() * f64::EPSILON * a.rows() as f64;
    match Lu::factor(a, floor.max(f64::MIN_POSITIVE)) {
        Ok(lu) => Ok((0..lu.n).map(|i| lu.lu[i * lu.n + i].abs().ln()).sum()),
        Err(NumError::Singular { .. }) => Ok(f64::NEG_INFINITY),
        Err(e) => Err(e),
    }
}

/// Numerical rank by Gaussian elimination with partial pivoting.
pub fn rank(a: &RealMatrix) -> usize {
    let (rows, cols) = a.shape();
    let mut m = a.as_slice().to_vec();
    let threshold = a.max_abs() * rows.max(cols) as f64 * 1e-12;
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let (p, value) = (rank..rows)
            .map(|i| (i, m[i * cols + col].abs()))
            .fold((rank, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if value <= threshold {
            continue;
        }
        for j in 0..cols {
            m.swap(rank * cols + j, p * cols + j);
        }
        let pivot = m[rank * cols + col];
        for i in rank + 1..rows {
            let factor = m[i * cols + col] / pivot;
            if factor != 0.0 {
                for j in col..cols {
                    m[i * cols + j] -= factor * m[rank * cols + j];
                }
            }
        }
        rank += 1;
    }
    rank
}
