use serde::Serialize;

use super::{ClusterError, ClusterResult};
use crate::numkit::{eig_sym, RealMatrix};

/// Principal axes of a sample matrix, strongest first.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `features × k`; column `c` is the `c`-th principal direction.
    #[serde(skip)]
    pub components: RealMatrix,
    /// Covariance eigenvalues of the kept directions, descending.
    pub explained: Vec<f64>,
}

/// Fits the top `k` directions of the covariance `(1/N)·XcᵀXc`.
pub fn pca_fit(x: &RealMatrix, k: usize) -> ClusterResult<PcaModel> {
    let (n, d) = x.shape();
    if n < 2 {
        return Err(ClusterError::TooFewSamples { found: n, needed: 2 });
    }
    if k == 0 || k > d {
        return Err(ClusterError::Components { k, features: d });
    }
    let mean: Vec<f64> = (0..d)
        .map(|j| (0..n).map(|i| x.get(i, j)).sum::<f64>() / n as f64)
        .collect();
    let centered = RealMatrix::from_fn(n, d, |i, j| x.get(i, j) - mean[j]);
    let cov = centered.gram().scale(1.0 / n as f64);
    let eig = eig_sym(&cov)?;
    let components = RealMatrix::from_fn(d, k, |i, c| eig.vectors.get(i, c));
    let explained = eig.values[..k].iter().map(|v| v.max(0.0)).collect();
    Ok(PcaModel {
        mean,
        components,
        explained,
    })
}

impl PcaModel {
    pub fn k(&self) -> usize {
        self.components.cols()
    }

    /// `z = (x − mean)·components`.
    pub fn project(&self, x: &RealMatrix) -> ClusterResult<RealMatrix> {
        let d = self.mean.len();
        if x.cols() != d {
            return Err(ClusterError::Width {
                expected: d,
                found: x.cols(),
            });
        }
        Ok(RealMatrix::from_fn(x.rows(), self.k(), |i, c| {
            (0..d)
                .map(|j| (x.get(i, j) - self.mean[j]) * self.components.get(j, c))
                .sum()
        }))
    }

    pub fn reconstruct(&self, z: &RealMatrix) -> ClusterResult<RealMatrix> {
        if z.cols() != self.k() {
            return Err(ClusterError::Width {
                expected: self.k(),
                found: z.cols(),
            });
        }
        let d = self.mean.len();
        Ok(RealMatrix::from_fn(z.rows(), d, |i, j| {
            self.mean[j]
                + (0..self.k())
                    .map(|c| z.get(i, c) * self.components.get(j, c))
                    .sum::<f64>()
        }))
    }
}

/// Free-function form of [`PcaModel::project`].
pub fn pca_project(model: &PcaModel, x: &RealMatrix) -> ClusterResult<RealMatrix> {
    model.project(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;
    use rand::Rng;

    fn random(rows: usize, cols: usize, seed: u64) -> RealMatrix {
        let mut r = rng::stream(seed, 0);
        RealMatrix::from_fn(rows, cols, |_, _| r.gen_range(-1.0..1.0))
    }

    #[test]
    fn line_in_the_plane() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, 2.0 * i as f64 + 1.0]).collect();
        let m = pca_fit(&RealMatrix::from_rows(&rows).unwrap(), 2).unwrap();
        let (a, b) = (m.components.get(0, 0), m.components.get(1, 0));
        assert!((b / a - 2.0).abs() < 1e-10);
        assert!(m.explained[1].abs() < 1e-10);
    }

    #[test]
    fn components_are_orthonormal_and_sorted() {
        let x = random(50, 6, 1);
        let m = pca_fit(&x, 4).unwrap();
        let g = m.components.gram();
        assert!(g.max_abs_diff(&RealMatrix::identity(4)).unwrap() < 1e-10);
        assert!(m.explained.windows(2).all(|w| w[0] >= w[1]));
        assert!(m.explained.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn full_rank_reconstruction() {
        let x = random(50, 6, 2);
        let m = pca_fit(&x, 6).unwrap();
        let z = m.project(&x).unwrap();
        let back = m.reconstruct(&z).unwrap();
        assert!(back.max_abs_diff(&x).unwrap() < 1e-9);
        // Orthogonal change of basis keeps distances.
        for (i, j) in [(0, 1), (3, 40), (10, 49)] {
            let dx: f64 = (0..6).map(|c| (x.get(i, c) - x.get(j, c)).powi(2)).sum();
            let dz: f64 = (0..6).map(|c| (z.get(i, c) - z.get(j, c)).powi(2)).sum();
            assert!((dx - dz).abs() < 1e-10);
        }
    }

    #[test]
    fn explained_variance_matches_projected_variance() {
        let x = random(80, 5, 3);
        let m = pca_fit(&x, 3).unwrap();
        let z = m.project(&x).unwrap();
        for c in 0..3 {
            let var = (0..80).map(|i| z.get(i, c).powi(2)).sum::<f64>() / 80.0;
            assert!((var - m.explained[c]).abs() < 1e-10);
        }
    }

    #[test]
    fn argument_errors() {
        let x = random(5, 3, 4);
        assert!(pca_fit(&x, 4).is_err());
        assert!(pca_fit(&x, 0).is_err());
        assert!(pca_fit(&random(1, 3, 5), 1).is_err());
        let m = pca_fit(&x, 2).unwrap();
        assert!(m.project(&random(2, 4, 6)).is_err());
    }
}
