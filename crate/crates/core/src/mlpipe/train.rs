use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dataset::{Dataset, DatasetMeta};
use super::schedule::{ScheduleCheck, StepSchedule};
use super::{MlError, MlResult};
use crate::numkit::RealMatrix;
use crate::{rng, tol};

/// Loss growth over the initial loss that counts as divergence.
const DIVERGENCE_FACTOR: f64 = 1e6;

/// `y = W·x + b` with `W` of shape `outputs × inputs`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub w: RealMatrix,
    pub b: Vec<f64>,
    pub meta: ModelMeta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub dataset: Option<DatasetMeta>,
    pub epochs: usize,
    pub final_loss: f64,
    pub schedule: StepSchedule,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    #[serde(rename = "W")]
    w: Vec<Vec<f64>>,
    b: Vec<f64>,
    meta: ModelMeta,
}

impl LinearModel {
    pub fn inputs(&self) -> usize {
        self.w.cols()
    }

    pub fn outputs(&self) -> usize {
        self.w.rows()
    }

    pub fn predict(&self, x: &[f64]) -> MlResult<Vec<f64>> {
        if x.len() != self.inputs() {
            return Err(MlError::ShapeMismatch {
                expected: self.inputs(),
                found: x.len(),
            });
        }
        let mut y = self.w.mul_vec(x)?;
        for (yi, bi) in y.iter_mut().zip(&self.b) {
            *yi += bi;
        }
        Ok(y)
    }

    pub fn predict_all(&self, x: &RealMatrix) -> MlResult<RealMatrix> {
        let rows = (0..x.rows())
            .map(|i| self.predict(x.row(i)))
            .collect::<MlResult<Vec<_>>>()?;
        if rows.is_empty() {
            return Ok(RealMatrix::zeros(0, self.outputs()));
        }
        Ok(RealMatrix::from_rows(&rows)?)
    }

    /// Mean squared error over every output element.
    pub fn mse(&self, ds: &Dataset) -> MlResult<f64> {
        if ds.is_empty() {
            return Err(MlError::EmptyDataset);
        }
        let pred = self.predict_all(ds.x())?;
        let total: f64 = pred
            .as_slice()
            .iter()
            .zip(ds.y().as_slice())
            .map(|(p, y)| (p - y).powi(2))
            .sum();
        Ok(total / (ds.len() * ds.outputs()) as f64)
    }

    pub fn to_json(&self) -> MlResult<String> {
        let file = ModelFile {
            w: self.w.to_rows(),
            b: self.b.clone(),
            meta: self.meta.clone(),
        };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> MlResult<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        let w = RealMatrix::from_rows(&file.w)?;
        if file.b.len() != w.rows() {
            return Err(MlError::Format(format!(
                "bias has {} entries for {} outputs",
                file.b.len(),
                w.rows()
            )));
        }
        Ok(Self {
            w,
            b: file.b,
            meta: file.meta,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientMode {
    /// One exact gradient step on the full-batch MSE per epoch.
    #[default]
    FullBatch,
    /// One step per sample, in a fresh random order each epoch.
    PerSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub schedule: StepSchedule,
    pub epochs: usize,
    pub seed: u64,
    pub stop_loss: f64,
    /// Train on standardized inputs and map the weights back afterwards.
    pub standardize: bool,
    pub bias: bool,
    pub mode: GradientMode,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            schedule: StepSchedule::default(),
            epochs: 5000,
            seed: 0,
            stop_loss: tol::TRAIN_STOP_LOSS,
            standardize: true,
            bias: true,
            mode: GradientMode::FullBatch,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: LinearModel,
    /// Full-batch MSE after each epoch.
    pub loss_trace: Vec<f64>,
    pub lr_trace: Vec<f64>,
    pub stopped_early: bool,
    pub schedule_check: ScheduleCheck,
}

impl TrainOutcome {
    pub fn final_loss(&self) -> f64 {
        self.model.meta.final_loss
    }
}

/// Affine input transform `z = (x − μ) / s`.
struct Standardizer {
    mean: Vec<f64>,
    scale: Vec<f64>,
}

impl Standardizer {
    fn fit(x: &RealMatrix, standardize: bool, center: bool) -> Self {
        let (n, d) = x.shape();
        let mut mean = vec![0.0; d];
        let mut scale = vec![1.0; d];
        if !standardize {
            return Self { mean, scale };
        }
        for j in 0..d {
            let col = x.column(j);
            let mu = if center {
                col.iter().sum::<f64>() / n as f64
            } else {
                0.0
            };
            let spread = (col.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / n as f64).sqrt();
            mean[j] = mu;
            scale[j] = if spread > 0.0 { spread } else { 1.0 };
        }
        Self { mean, scale }
    }

    fn row(&self, x: &[f64], bias: bool, out: &mut Vec<f64>) {
        out.clear();
        out.extend(
            x.iter()
                .zip(self.mean.iter().zip(&self.scale))
                .map(|(v, (m, s))| (v - m) / s),
        );
        if bias {
            out.push(1.0);
        }
    }
}

/// Fits a linear model by gradient descent on the MSE.
///
/// Full-batch mode works on the sufficient statistics `ZᵀZ`, `YᵀZ` and
/// `tr(YᵀY)`, so an epoch costs `O(outputs · inputs²)` regardless of the
/// sample count.
pub fn train(ds: &Dataset, config: &TrainConfig) -> MlResult<TrainOutcome> {
    if ds.is_empty() {
        return Err(MlError::EmptyDataset);
    }
    let schedule_check = config.schedule.validate()?;
    if config.stop_loss.is_nan() || config.stop_loss < 0.0 {
        return Err(MlError::InvalidParameter(format!(
            "stop_loss {} must be non-negative",
            config.stop_loss
        )));
    }
    let (samples, inputs) = ds.x().shape();
    let outputs = ds.outputs();
    let bias = config.bias;
    let width = inputs + bias as usize;

    let st = Standardizer::fit(ds.x(), config.standardize, bias);
    let mut z = Vec::with_capacity(samples * width);
    let mut buf = Vec::with_capacity(width);
    for i in 0..samples {
        st.row(ds.x().row(i), bias, &mut buf);
        z.extend_from_slice(&buf);
    }
    let z = RealMatrix::new(samples, width, z)?;

    let inv_n = 1.0 / samples as f64;
    let gram = z.gram().scale(inv_n);
    let cross = RealMatrix::from_fn(outputs, width, |o, j| {
        (0..samples).map(|i| ds.y().get(i, o) * z.get(i, j)).sum::<f64>() * inv_n
    });
    let yy = ds.y().as_slice().iter().map(|v| v * v).sum::<f64>() * inv_n;

    // Initial weights are drawn in the original coordinates.
    let mut init_rng = rng::stream(config.seed, rng::purpose::INIT);
    let bias_range = 1.0 / (inputs.max(1) as f64).sqrt();
    let mut v = RealMatrix::zeros(outputs, width);
    for o in 0..outputs {
        let w0: Vec<f64> = (0..inputs).map(|_| init_rng.gen_range(-1.0..=1.0)).collect();
        let b0 = if bias {
            init_rng.gen_range(-bias_range..=bias_range)
        } else {
            0.0
        };
        for j in 0..inputs {
            v.set(o, j, w0[j] * st.scale[j]);
        }
        if bias {
            let shift: f64 = w0.iter().zip(&st.mean).map(|(w, m)| w * m).sum();
            v.set(o, inputs, b0 + shift);
        }
    }

    let loss_of = |v: &RealMatrix| -> f64 {
        let mut total = yy;
        for o in 0..outputs {
            let vo = v.row(o);
            let mut quad = 0.0;
            for a in 0..width {
                quad += vo[a] * dot(gram.row(a), vo);
            }
            total += quad - 2.0 * dot(vo, cross.row(o));
        }
        (total / outputs as f64).max(0.0)
    };

    let initial = loss_of(&v);
    let grad_scale = 2.0 / outputs as f64;
    let mut shuffle_rng = rng::stream(config.seed, rng::purpose::SHUFFLE);
    let mut order: Vec<usize> = (0..samples).collect();
    let mut loss_trace = Vec::with_capacity(config.epochs.min(1 << 20));
    let mut lr_trace = Vec::with_capacity(config.epochs.min(1 << 20));
    let mut stopped_early = initial < config.stop_loss;

    if !stopped_early {
        for (epoch, lr) in config.schedule.iter().take(config.epochs).enumerate() {
            match config.mode {
                GradientMode::FullBatch => {
                    let mut next = v.clone();
                    for o in 0..outputs {
                        let vo = v.row(o);
                        let row = next.row_mut(o);
                        for a in 0..width {
                            let g = dot(vo, gram.row(a)) - cross.get(o, a);
                            row[a] -= lr * grad_scale * g;
                        }
                    }
                    v = next;
                }
                GradientMode::PerSample => {
                    order.shuffle(&mut shuffle_rng);
                    for &i in &order {
                        let zi = z.row(i);
                        for o in 0..outputs {
                            let residual = dot(v.row(o), zi) - ds.y().get(i, o);
                            let step = lr * grad_scale * residual;
                            for (w, zv) in v.row_mut(o).iter_mut().zip(zi) {
                                *w -= step * zv;
                            }
                        }
                    }
                }
            }
            let loss = loss_of(&v);
            lr_trace.push(lr);
            loss_trace.push(loss);
            if !loss.is_finite() || loss > DIVERGENCE_FACTOR * initial.max(f64::MIN_POSITIVE) {
                return Err(MlError::Diverged { epoch, loss });
            }
            if loss < config.stop_loss {
                stopped_early = true;
                break;
            }
        }
    }

    let mut w = RealMatrix::zeros(outputs, inputs);
    let mut b = vec![0.0; outputs];
    for o in 0..outputs {
        let mut shift = 0.0;
        for j in 0..inputs {
            let wj = v.get(o, j) / st.scale[j];
            w.set(o, j, wj);
            shift += wj * st.mean[j];
        }
        if bias {
            b[o] = v.get(o, inputs) - shift;
        }
    }
    let mut model = LinearModel {
        w,
        b,
        meta: ModelMeta {
            dataset: Some(ds.meta().clone()),
            epochs: loss_trace.len(),
            final_loss: 0.0,
            schedule: config.schedule,
        },
    };
    model.meta.final_loss = model.mse(ds)?;
    log::debug!(
        "trained {} epochs, final loss {:.3e}",
        model.meta.epochs,
        model.meta.final_loss
    );
    Ok(TrainOutcome {
        model,
        loss_trace,
        lr_trace,
        stopped_early,
        schedule_check,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
