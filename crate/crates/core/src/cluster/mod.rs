//! PCA and single-linkage clustering used to split raw datasets by circuit
//! template and keep the dominant family.

mod linkage;
mod pca;

use serde::Serialize;
use thiserror::Error;

pub use linkage::{hcluster, Clustering};
pub use pca::{pca_fit, pca_project, PcaModel};

use crate::mlpipe::{gen_raw, Dataset, MlError, RawConfig, SENTINEL};
use crate::numkit::{NumError, RealMatrix};

/// Default linkage threshold: half the π gap between template families.
pub const DEFAULT_THRESHOLD: f64 = std::f64::consts::FRAC_PI_2;

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error(transparent)]
    Numeric(#[from] NumError),

    #[error(transparent)]
    Ml(#[from] MlError),

    #[error("need at least {needed} samples, found {found}")]
    TooFewSamples { found: usize, needed: usize },

    #[error("cannot keep {k} components of {features} features")]
    Components { k: usize, features: usize },

    #[error("expected {expected} columns, found {found}")]
    Width { expected: usize, found: usize },

    #[error("clustering covers {clustered} samples but the dataset has {rows}")]
    LengthMismatch { clustered: usize, rows: usize },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type ClusterResult<T> = Result<T, ClusterError>;

#[derive(Debug, Clone)]
pub struct Filtered {
    pub dataset: Dataset,
    pub cluster: usize,
    /// Original indices of the kept rows, ascending.
    pub rows: Vec<usize>,
    /// Original indices of the kept input columns.
    pub columns: Vec<usize>,
    /// Another cluster had the same size as the kept one.
    pub tie: bool,
}

/// Keeps the rows of the largest cluster and drops input columns that are
/// padding in every kept row.
pub fn filter_dominant(ds: &Dataset, clustering: &Clustering) -> ClusterResult<Filtered> {
    if clustering.assignments.len() != ds.len() {
        return Err(ClusterError::LengthMismatch {
            clustered: clustering.assignments.len(),
            rows: ds.len(),
        });
    }
    let (cluster, size) = clustering
        .largest()
        .ok_or(ClusterError::TooFewSamples { found: 0, needed: 1 })?;
    let tie = clustering.sizes.iter().filter(|&&s| s == size).count() > 1;
    if tie {
        log::warn!("largest clusters tie at {size} samples; keeping cluster {cluster}");
    }
    let rows = clustering.members(cluster);
    let columns: Vec<usize> = (0..ds.inputs())
        .filter(|&j| !rows.iter().all(|&i| ds.x().get(i, j) == SENTINEL))
        .collect();
    let dataset = ds.select(&rows).keep_inputs(&columns);
    Ok(Filtered {
        dataset,
        cluster,
        rows,
        columns,
        tie,
    })
}

/// Fraction of samples whose template is the majority template of their cluster.
pub fn purity(assignments: &[usize], templates: &[usize]) -> f64 {
    if assignments.is_empty() {
        return 1.0;
    }
    let clusters = assignments.iter().max().map_or(0, |m| m + 1);
    let kinds = templates.iter().max().map_or(0, |m| m + 1);
    let mut counts = vec![vec![0usize; kinds]; clusters];
    for (&a, &t) in assignments.iter().zip(templates) {
        counts[a][t] += 1;
    }
    let majority: usize = counts.iter().map(|c| c.iter().max().copied().unwrap_or(0)).sum();
    majority as f64 / assignments.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShareRow {
    pub n: usize,
    pub samples: usize,
    pub clusters: usize,
    pub largest_share: f64,
    pub purity: f64,
}

/// Largest-cluster share of a raw dataset for each qubit count.
pub fn cluster_share_report(
    ns: &[usize],
    samples: usize,
    seed: u64,
    config: &RawConfig,
    threshold: f64,
) -> ClusterResult<Vec<ShareRow>> {
    ns.iter()
        .map(|&n| {
            let ds = gen_raw(n, samples, seed, config)?;
            let c = hcluster(ds.x(), threshold);
            let largest = c.largest().map_or(0, |(_, s)| s);
            Ok(ShareRow {
                n,
                samples,
                clusters: c.count(),
                largest_share: if samples == 0 { 0.0 } else { largest as f64 / samples as f64 },
                purity: ds.templates().map_or(f64::NAN, |t| purity(&c.assignments, t)),
            })
        })
        .collect()
}

pub fn share_csv(rows: &[ShareRow]) -> ClusterResult<String> {
    to_csv(rows)
}

#[derive(Serialize)]
struct SampleRow {
    sample: usize,
    cluster_id: usize,
    pc1: Option<f64>,
    pc2: Option<f64>,
}

#[derive(Serialize)]
struct SizeRow {
    cluster_id: usize,
    size: usize,
}

/// Per-sample table `(sample, cluster_id, pc1, pc2)`; the PC columns are
/// empty when no projection is given.
pub fn assignments_csv(clustering: &Clustering, projected: Option<&RealMatrix>) -> ClusterResult<String> {
    let pc = |i: usize, c: usize| projected.filter(|p| p.cols() > c).map(|p| p.get(i, c));
    let rows: Vec<SampleRow> = clustering
        .assignments
        .iter()
        .enumerate()
        .map(|(i, &cluster_id)| SampleRow {
            sample: i,
            cluster_id,
            pc1: pc(i, 0),
            pc2: pc(i, 1),
        })
        .collect();
    to_csv(&rows)
}

pub fn sizes_csv(clustering: &Clustering) -> ClusterResult<String> {
    let rows: Vec<SizeRow> = clustering
        .sizes
        .iter()
        .enumerate()
        .map(|(cluster_id, &size)| SizeRow { cluster_id, size })
        .collect();
    to_csv(&rows)
}

fn to_csv<T: Serialize>(rows: &[T]) -> ClusterResult<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| ClusterError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlpipe::{DatasetMeta, RawTemplate, Stage};
    use crate::sequences::SequenceKind;
    use std::f64::consts::FRAC_PI_2 as H;

    fn meta() -> DatasetMeta {
        DatasetMeta {
            n: 2,
            sequence_kind: SequenceKind::BinaryTree,
            epsilon: None,
            seed: 0,
            stage: Stage::Raw,
        }
    }

    #[test]
    fn worked_example_keeps_the_pair() {
        let x = vec![
            vec![H, H, -H, -H, H, -H, H, -H, 0.0146, 0.0, H, 0.0682, H, 1.439, -H],
            vec![H, H, -H, -H, H, -H, H, -H, 0.0031, 0.0, H, 0.0396, H, 1.492, -H],
            vec![-H, H, -H, H, H, -H, H, -H, 0.0015, 0.0, -H, 0.0309, H, 1.633, H],
        ];
        let y: Vec<Vec<f64>> = (0..3)
            .map(|r| (1..=4).map(|k| ((4 * r + k) as f64).sqrt() / 5.0).collect())
            .collect();
        let ds = Dataset::new(
            RealMatrix::from_rows(&x).unwrap(),
            RealMatrix::from_rows(&y).unwrap(),
            meta(),
        )
        .unwrap();
        let c = hcluster(ds.x(), DEFAULT_THRESHOLD);
        assert_eq!(c.assignments, vec![0, 0, 1]);
        let f = filter_dominant(&ds, &c).unwrap();
        assert_eq!(f.rows, vec![0, 1]);
        assert_eq!(f.dataset.y().to_rows(), y[..2].to_vec());
        assert_eq!(f.columns.len(), 15);
        assert!(!f.tie);
    }

    #[test]
    fn single_cluster_leaves_data_alone() {
        let ds = gen_raw(2, 40, 1, &RawConfig { mutation_prob: 0.0, doubled_prob: 0.0, ..RawConfig::default() }).unwrap();
        let c = hcluster(ds.x(), DEFAULT_THRESHOLD);
        assert_eq!(c.count(), 1);
        let f = filter_dominant(&ds, &c).unwrap();
        assert_eq!(f.dataset, ds);
    }

    #[test]
    fn padding_columns_are_stripped_and_pairs_kept() {
        let config = RawConfig {
            mutation_prob: 0.0,
            doubled_prob: 0.3,
            ..RawConfig::default()
        };
        let ds = gen_raw(3, 300, 8, &config).unwrap();
        let c = hcluster(ds.x(), DEFAULT_THRESHOLD);
        assert_eq!(c.count(), 2);
        let f = filter_dominant(&ds, &c).unwrap();
        assert_eq!(f.dataset.inputs(), 7);
        let reference = ds.select(&f.rows).keep_inputs(&f.columns);
        for i in 0..f.dataset.len() {
            assert_eq!(f.dataset.row_hash(i), reference.row_hash(i));
        }
        // Every kept row reproduces its target through the plain template.
        let kind = config.sequence_kind;
        for i in 0..f.dataset.len() {
            let circuit = RawTemplate::from_id(0).circuit(3, kind, f.dataset.x().row(i)).unwrap();
            let phases = crate::circuit::diag_phases(&circuit).unwrap().into_vec();
            let target = f.dataset.y().row(i);
            let shift = phases[0] - target[0];
            for (p, t) in phases.iter().zip(target) {
                assert!(crate::circuit::wrap_angle(p - t - shift).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ties_pick_the_lowest_id() {
        let x = RealMatrix::from_rows(&[vec![0.0], vec![10.0], vec![0.1], vec![10.1]]).unwrap();
        let ds = Dataset::new(x, RealMatrix::zeros(4, 1), meta()).unwrap();
        let f = filter_dominant(&ds, &hcluster(ds.x(), 1.0)).unwrap();
        assert!(f.tie);
        assert_eq!(f.rows, vec![0, 2]);
        let wrong = hcluster(&RealMatrix::zeros(3, 1), 1.0);
        assert!(filter_dominant(&ds, &wrong).is_err());
    }

    #[test]
    fn purity_counts_majorities() {
        assert_eq!(purity(&[0, 0, 1, 1], &[0, 0, 1, 1]), 1.0);
        assert_eq!(purity(&[0, 0, 0, 0], &[0, 0, 1, 1]), 0.5);
        assert_eq!(purity(&[0, 0, 1, 1], &[0, 1, 1, 1]), 0.75);
    }

    #[test]
    fn share_report_without_mutation() {
        let config = RawConfig {
            mutation_prob: 0.0,
            doubled_prob: 0.0,
            ..RawConfig::default()
        };
        let rows = cluster_share_report(&[2, 3], 100, 1, &config, DEFAULT_THRESHOLD).unwrap();
        assert!(rows.iter().all(|r| r.largest_share == 1.0 && r.clusters == 1));
        let again = cluster_share_report(&[2, 3], 100, 1, &config, DEFAULT_THRESHOLD).unwrap();
        assert_eq!(rows, again);
        let csv = share_csv(&rows).unwrap();
        assert!(csv.starts_with("n,samples,clusters,largest_share,purity\n"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn equiprobable_templates_split_evenly() {
        let config = RawConfig {
            mutation_prob: 0.5,
            doubled_prob: 0.0,
            ..RawConfig::default()
        };
        let samples = 400;
        let rows = cluster_share_report(&[2], samples, 3, &config, DEFAULT_THRESHOLD).unwrap();
        let r = &rows[0];
        assert_eq!(r.clusters, 2);
        assert_eq!(r.purity, 1.0);
        // Larger of two Binomial(400, 1/2) halves: within four standard deviations.
        let sd = 0.5 / (samples as f64).sqrt();
        assert!(r.largest_share >= 0.5 && r.largest_share <= 0.5 + 4.0 * sd, "{r:?}");
    }

    #[test]
    fn csv_tables() {
        let c = hcluster(&RealMatrix::from_rows(&[vec![0.0, 0.0], vec![5.0, 5.0]]).unwrap(), 1.0);
        let text = assignments_csv(&c, None).unwrap();
        assert_eq!(text, "sample,cluster_id,pc1,pc2\n0,0,,\n1,1,,\n");
        let p = RealMatrix::from_rows(&[vec![1.5, 0.0], vec![-1.5, 0.0]]).unwrap();
        assert!(assignments_csv(&c, Some(&p)).unwrap().contains("1,1,-1.5,0.0"));
        assert_eq!(sizes_csv(&c).unwrap(), "cluster_id,size\n0,1\n1,1\n");
    }
}
