use super::{NumError, NumResult, RealMatrix};
use crate::tol;

/// Eigenpairs of a symmetric matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    /// Column `k` is the unit eigenvector for `values[k]`.
    pub vectors: RealMatrix,
    pub sweeps: usize,
}

/// Cyclic-by-rows Jacobi eigendecomposition `S = V Λ Vᵀ`.
///
/// Sweeps stop when the off-diagonal Frobenius norm falls below
/// [`tol::JACOBI_OFF_DIAGONAL`] (relative to `‖S‖F` when that exceeds one) or
/// after [`tol::JACOBI_MAX_SWEEPS`] sweeps.
pub fn eig_sym(s: &RealMatrix) -> NumResult<SymEigen> {
    if !s.is_square() {
        return Err(NumError::NotSquare(s.shape()));
    }
    let n = s.rows();
    for i in 0..n {
        for j in i + 1..n {
            let gap = (s.get(i, j) - s.get(j, i)).abs();
            if gap > tol::SYMMETRY {
                return Err(NumError::NotSymmetric { row: i, col: j, gap });
            }
        }
    }

    let mut a = s.as_slice().to_vec();
    let mut v = RealMatrix::identity(n).into_vec();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    let off = |a: &[f64]| -> f64 {
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    sum += a[i * n + j] * a[i * n + j];
                }
            }
        }
        sum.sqrt()
    };

    let mut sweeps = 0;
    while sweeps < tol::JACOBI_MAX_SWEEPS && off(&a) >= tol::JACOBI_OFF_DIAGONAL * scale {
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k * n + p], a[k * n + q]);
                    a[k * n + p] = c * akp - sn * akq;
                    a[k * n + q] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p * n + k], a[q * n + k]);
                    a[p * n + k] = c * apk - sn * aqk;
                    a[q * n + k] = sn * apk + c * aqk;
                }
                a[p * n + q] = 0.0;
                a[q * n + p] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[k * n + p], v[k * n + q]);
                    v[k * n + p] = c * vkp - sn * vkq;
                    v[k * n + q] = sn * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = RealMatrix::from_fn(n, n, |r, c| v[r * n + order[c]]);
    Ok(SymEigen {
        values,
        vectors,
        sweeps,
    })
}
