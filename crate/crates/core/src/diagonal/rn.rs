use std::collections::HashMap;
use std::f64::consts::LN_2;

use serde::Serialize;

use super::{DiagonalError, DiagonalResult, PhaseMap};
use crate::numkit::{logabsdet, matmul, IntMatrix, RealMatrix};
use crate::sequences::SequenceKind;

/// Largest `n` accepted by [`rn_matrix`].
pub const MAX_RN: usize = 12;

/// `±1` matrix of size `2ⁿ⁻¹` acting on the tail angles of the last qubit.
#[derive(Debug, Clone, PartialEq)]
pub struct RnMatrix {
    n: usize,
    entries: IntMatrix,
}

impl RnMatrix {
    /// Checks shape, `±1` entries, an all-ones first row and balanced other rows.
    pub fn new(n: usize, entries: IntMatrix) -> DiagonalResult<Self> {
        let mismatch = |reason: String| DiagonalError::RnMismatch { n, reason };
        let size = 1usize << (n - 1);
        if entries.shape() != (size, size) {
            return Err(mismatch(format!("shape {:?}, expected {size}x{size}", entries.shape())));
        }
        if let Some(v) = entries.as_slice().iter().find(|v| v.abs() != 1) {
            return Err(mismatch(format!("entry {v} is not ±1")));
        }
        if entries.row(0).iter().any(|&v| v != 1) {
            return Err(mismatch("first row is not all +1".into()));
        }
        for i in 1..size {
            let sum: i64 = entries.row(i).iter().sum();
            if sum != 0 {
                return Err(mismatch(format!("row {i} is unbalanced (sum {sum})")));
            }
        }
        Ok(Self { n, entries })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn size(&self) -> usize {
        self.entries.rows()
    }

    pub fn entries(&self) -> &IntMatrix {
        &self.entries
    }

    /// Whether `r·rᵀ = 2ⁿ⁻¹·I` holds exactly.
    pub fn is_orthogonal(&self) -> bool {
        let gram = matmul(&self.entries, &self.entries.transpose()).expect("square matrix");
        let scale = self.size() as i64;
        (0..self.size()).all(|i| {
            gram.row(i)
                .iter()
                .enumerate()
                .all(|(j, &v)| v == if i == j { scale } else { 0 })
        })
    }
}

fn literal(n: usize) -> Option<Vec<Vec<i64>>> {
    let rows: &[&[i64]] = match n {
        2 => &[&[1, 1], &[1, -1]],
        3 => &[&[1, 1, 1, 1], &[1, -1, -1, 1], &[1, 1, -1, -1], &[1, -1, 1, -1]],
        4 => &[
            &[1, 1, 1, 1, 1, 1, 1, 1],
            &[1, -1, -1, 1, 1, -1, -1, 1],
            &[1, 1, -1, -1, -1, -1, 1, 1],
            &[1, -1, 1, -1, -1, 1, -1, 1],
            &[1, 1, 1, 1, -1, -1, -1, -1],
            &[1, -1, -1, 1, -1, 1, 1, -1],
            &[1, 1, -1, -1, 1, 1, -1, -1],
            &[1, -1, 1, -1, 1, -1, 1, -1],
        ],
        _ => return None,
    };
    Some(rows.iter().map(|r| r.to_vec()).collect())
}

/// Sylvester–Hadamard matrix of order `2ᵏ`: entry `(−1)^{popcount(i & j)}`,
/// equal to `r₂^{⊗k}`.
pub fn sylvester(k: usize) -> IntMatrix {
    let size = 1usize << k;
    IntMatrix::from_fn(size, size, |i, j| {
        if (i & j).count_ones() % 2 == 0 {
            1
        } else {
            -1
        }
    })
}

/// Tail block of the phase map on the last qubit, scaled by 2.
///
/// Rows are the basis states with the last qubit at 0 (the other half only
/// repeats them with flipped signs); each column is sign-normalised so the
/// first row is `+1`.
pub fn extract_rn(n: usize, kind: SequenceKind) -> DiagonalResult<RnMatrix> {
    check_n(n)?;
    let map = PhaseMap::cached(n, kind)?;
    let size = 1usize << (n - 1);
    let first = map.cols() - size;
    let entries = IntMatrix::from_fn(size, size, |i, k| {
        let j = first + k;
        let sign = if map.entry(0, j) > 0.0 { 1 } else { -1 };
        let v = if map.entry(2 * i, j) > 0.0 { 1 } else { -1 };
        sign * v
    });
    RnMatrix::new(n, entries)
}

fn check_n(n: usize) -> DiagonalResult<()> {
    if !(2..=MAX_RN).contains(&n) {
        return Err(DiagonalError::QubitCount { n, max: MAX_RN });
    }
    Ok(())
}

/// Row and column labels exhibiting a `±1` matrix as a permuted Sylvester
/// matrix: `r[i][j] = (−1)^{popcount(rows[i] & cols[j])}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SylvesterLabeling {
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
}

impl SylvesterLabeling {
    /// Permutations `(p, q)` with `b[i][j] = a[p[i]][q[j]]`, given labelings
    /// of `a` (`self`) and `b`.
    pub fn permutation_to(&self, other: &Self) -> (Vec<usize>, Vec<usize>) {
        let invert = |labels: &[usize]| {
            let mut inv = vec![0; labels.len()];
            for (i, &l) in labels.iter().enumerate() {
                inv[l] = i;
            }
            inv
        };
        let (ri, ci) = (invert(&self.rows), invert(&self.cols));
        (
            other.rows.iter().map(|&l| ri[l]).collect(),
            other.cols.iter().map(|&l| ci[l]).collect(),
        )
    }
}

/// Finds a Sylvester labeling of a square `±1` matrix, or `None` when it is
/// not a row/column permutation of `r₂^{⊗k}`.
///
/// Rows of a Sylvester matrix form a group under the entrywise product. The
/// all-ones row is the identity; generators are picked greedily until their
/// products cover every row, which fixes the row labels. A column's label is
/// its sign pattern on the generators. Every entry is then checked.
pub fn sylvester_labeling(r: &IntMatrix) -> Option<SylvesterLabeling> {
    let size = r.rows();
    if !r.is_square() || size == 0 || !size.is_power_of_two() {
        return None;
    }
    let k = size.trailing_zeros() as usize;
    let mut span: HashMap<Vec<i64>, usize> = HashMap::with_capacity(size);
    span.insert(vec![1; size], 0);
    let mut generators: Vec<usize> = Vec::with_capacity(k);
    for i in 0..size {
        let row = r.row(i);
        if span.contains_key(row) {
            continue;
        }
        if generators.len() == k {
            return None;
        }
        let bit = 1 << generators.len();
        let products: Vec<(Vec<i64>, usize)> = span
            .iter()
            .map(|(v, &l)| (v.iter().zip(row).map(|(a, b)| a * b).collect(), l | bit))
            .collect();
        span.extend(products);
        generators.push(i);
    }
    if generators.len() != k {
        return None;
    }
    let rows: Vec<usize> = (0..size).map(|i| span[r.row(i)]).collect();
    let cols: Vec<usize> = (0..size)
        .map(|j| {
            generators
                .iter()
                .enumerate()
                .filter(|(_, &g)| r.get(g, j) == -1)
                .fold(0, |acc, (t, _)| acc | (1 << t))
        })
        .collect();
    let is_bijection = |labels: &[usize]| {
        let mut seen = vec![false; size];
        labels.iter().all(|&l| !std::mem::replace(&mut seen[l], true))
    };
    if !is_bijection(&rows) || !is_bijection(&cols) {
        return None;
    }
    let consistent = (0..size).all(|i| {
        (0..size).all(|j| {
            let parity = (rows[i] & cols[j]).count_ones() % 2;
            r.get(i, j) == if parity == 0 { 1 } else { -1 }
        })
    });
    consistent.then_some(SylvesterLabeling { rows, cols })
}

/// `r_n`: the fixed literals for `n ≤ 4`, the extracted binary-tree tail block
/// beyond. Fails unless the result is permutation-equivalent to
/// `r₂^{⊗(n−1)}`, and for `n ≤ 4` also to the extracted blocks of both
/// sequence kinds.
pub fn rn_matrix(n: usize) -> DiagonalResult<RnMatrix> {
    check_n(n)?;
    let r = match literal(n) {
        Some(rows) => {
            let r = RnMatrix::new(n, IntMatrix::from_rows(&rows)?)?;
            for kind in SequenceKind::ALL {
                let extracted = extract_rn(n, kind)?;
                if sylvester_labeling(extracted.entries()).is_none() {
                    return Err(DiagonalError::RnMismatch {
                        n,
                        reason: format!("extracted {kind} block is not a permuted tensor power"),
                    });
                }
            }
            r
        }
        None => extract_rn(n, SequenceKind::BinaryTree)?,
    };
    if sylvester_labeling(r.entries()).is_none() {
        return Err(DiagonalError::RnMismatch {
            n,
            reason: "not permutation-equivalent to r_2 tensor power".into(),
        });
    }
    Ok(r)
}

/// `rᵀ / 2ⁿ⁻¹`, after checking `r·rᵀ = 2ⁿ⁻¹·I` exactly.
pub fn rn_inverse(r: &RnMatrix) -> DiagonalResult<RealMatrix> {
    if !r.is_orthogonal() {
        return Err(DiagonalError::RnMismatch {
            n: r.n(),
            reason: "r·rᵀ is not a multiple of the identity".into(),
        });
    }
    Ok(r.entries().transpose().to_real().scale(1.0 / r.size() as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetRelationRow {
    pub n: usize,
    pub logabsdet: f64,
    /// `(n − 1)·2ⁿ⁻²·ln 2`.
    pub expected: f64,
    pub relative_error: f64,
    /// `ln |det r₂^{⊗(n−1)}|` from the explicit tensor power.
    pub tensor_logabsdet: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DetRelationReport {
    pub rows: Vec<DetRelationRow>,
    pub tolerance: f64,
}

impl DetRelationReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Compares `ln |det r_n|` with `(n − 1)·2ⁿ⁻²·ln 2` for `n = 2..=n_max`.
pub fn det_relation_check(n_max: usize) -> DiagonalResult<DetRelationReport> {
    const MAX: usize = 10;
    if n_max > MAX {
        return Err(DiagonalError::QubitCount { n: n_max, max: MAX });
    }
    let tolerance = 1e-9;
    let mut rows = Vec::new();
    for n in 2..=n_max {
        let r = rn_matrix(n)?;
        let logabsdet = logabsdet(&r.entries().to_real())?;
        let tensor_logabsdet = logabsdet_of(&tensor_power(n - 1))?;
        let expected = (n - 1) as f64 * (1u64 << (n - 2)) as f64 * LN_2;
        let relative_error = (logabsdet - expected).abs() / expected;
        let tensor_error = (tensor_logabsdet - expected).abs() / expected;
        rows.push(DetRelationRow {
            n,
            logabsdet,
            expected,
            relative_error,
            tensor_logabsdet,
            pass: relative_error < tolerance && tensor_error < tolerance,
        });
    }
    Ok(DetRelationReport { rows, tolerance })
}

fn logabsdet_of(m: &IntMatrix) -> DiagonalResult<f64> {
    Ok(logabsdet(&m.to_real())?)
}

/// `r₂^{⊗k}` by repeated Kronecker products.
fn tensor_power(k: usize) -> IntMatrix {
    let r2 = IntMatrix::from_rows(&[vec![1, 1], vec![1, -1]]).expect("2x2 literal");
    (1..k).fold(r2.clone(), |acc, _| acc.kron(&r2))
}
