use serde::Serialize;

use super::dataset::Dataset;
use super::train::LinearModel;
use super::{MlError, MlResult};

/// Regression quality; MAE and RMSE average over every output element,
/// R² is computed per output and then averaged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics {
    pub mae: f64,
    pub rmse: f64,
    /// `NaN` when some output column has zero variance.
    pub r2: f64,
    pub r2_defined: bool,
}

pub fn metrics(model: &LinearModel, ds: &Dataset) -> MlResult<Metrics> {
    if ds.is_empty() {
        return Err(MlError::EmptyDataset);
    }
    if model.outputs() != ds.outputs() {
        return Err(MlError::ShapeMismatch {
            expected: model.outputs(),
            found: ds.outputs(),
        });
    }
    let pred = model.predict_all(ds.x())?;
    let (n, outs) = ds.y().shape();
    let mut abs = 0.0;
    let mut sq = 0.0;
    let mut r2_sum = 0.0;
    let mut r2_defined = true;
    for o in 0..outs {
        let mean = (0..n).map(|i| ds.y().get(i, o)).sum::<f64>() / n as f64;
        let (mut ss_res, mut ss_tot) = (0.0, 0.0);
        for i in 0..n {
            let y = ds.y().get(i, o);
            let e = pred.get(i, o) - y;
            abs += e.abs();
            ss_res += e * e;
            ss_tot += (y - mean).powi(2);
        }
        sq += ss_res;
        if ss_tot > 0.0 {
            r2_sum += 1.0 - ss_res / ss_tot;
        } else {
            r2_defined = false;
        }
    }
    let count = (n * outs) as f64;
    Ok(Metrics {
        mae: abs / count,
        rmse: (sq / count).sqrt(),
        r2: if r2_defined { r2_sum / outs as f64 } else { f64::NAN },
        r2_defined,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mlpipe::{DatasetMeta, ModelMeta, Stage, StepSchedule};
    use crate::numkit::RealMatrix;
    use crate::sequences::SequenceKind;

    fn meta() -> DatasetMeta {
        DatasetMeta {
            n: 0,
            sequence_kind: SequenceKind::BinaryTree,
            epsilon: None,
            seed: 0,
            stage: Stage::Pretty,
        }
    }

    fn model(w: Vec<Vec<f64>>, b: Vec<f64>) -> LinearModel {
        LinearModel {
            w: RealMatrix::from_rows(&w).unwrap(),
            b,
            meta: ModelMeta {
                dataset: None,
                epochs: 0,
                final_loss: 0.0,
                schedule: StepSchedule::default(),
            },
        }
    }

    #[test]
    fn hand_computed_values() {
        // Predictions of y = x on x = 0, 1, 2, 3 against targets 0, 1, 2, 5.
        let x = RealMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let y = RealMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0], vec![5.0]]).unwrap();
        let ds = Dataset::new(x, y, meta()).unwrap();
        let m = metrics(&model(vec![vec![1.0]], vec![0.0]), &ds).unwrap();
        assert!((m.mae - 0.5).abs() < 1e-15);
        assert!((m.rmse - 1.0).abs() < 1e-15);
        // mean 2, SS_tot = 4 + 1 + 0 + 9 = 14, SS_res = 4.
        assert!((m.r2 - (1.0 - 4.0 / 14.0)).abs() < 1e-15);
        assert!(m.r2_defined);
    }

    #[test]
    fn r2_averages_per_output() {
        let x = RealMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let y = RealMatrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        let ds = Dataset::new(x, y, meta()).unwrap();
        // First output exact, second predicted as x: SS_res = 0 + 1 + 4, SS_tot = 8.
        let m = metrics(&model(vec![vec![1.0], vec![1.0]], vec![0.0, 0.0]), &ds).unwrap();
        assert!((m.r2 - 0.5 * (1.0 + (1.0 - 5.0 / 8.0))).abs() < 1e-15);
    }

    #[test]
    fn constant_output_flags_r2() {
        let x = RealMatrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        let y = RealMatrix::from_rows(&[vec![3.0], vec![3.0]]).unwrap();
        let ds = Dataset::new(x, y, meta()).unwrap();
        let m = metrics(&model(vec![vec![0.0]], vec![3.0]), &ds).unwrap();
        assert!(!m.r2_defined && m.r2.is_nan());
        assert_eq!(m.mae, 0.0);
    }

    #[test]
    fn shape_checks() {
        let x = RealMatrix::from_rows(&[vec![0.0]]).unwrap();
        let y = RealMatrix::from_rows(&[vec![0.0, 1.0]]).unwrap();
        let ds = Dataset::new(x, y, meta()).unwrap();
        assert!(metrics(&model(vec![vec![1.0]], vec![0.0]), &ds).is_err());
    }
}
