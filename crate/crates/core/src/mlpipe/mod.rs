//! Dataset generation, linear-model training and weight interpretation.
//!
//! The model maps circuit angles `x` to diagonal phases `y`, the direction in
//! which the relation is single-valued. On noiseless pretty data the learned
//! weights converge to the phase map itself.

mod dataset;
mod generate;
mod metrics;
mod schedule;
mod snap;
mod train;

use thiserror::Error;

pub use dataset::{pad_rows, Dataset, DatasetMeta, Stage, SENTINEL};
pub use generate::{
    gen_pretty, gen_raw, pi_jump_triple, RawConfig, RawTemplate, DEFAULT_EPSILON,
    DEFAULT_RAW_DELTA, MAX_PRETTY_EPSILON,
};
pub use metrics::{metrics, Metrics};
pub use schedule::{RobbinsMonroReport, ScheduleCheck, StepSchedule};
pub use snap::{snap_weights, MapMatch, SnapReport};
pub use train::{train, GradientMode, LinearModel, ModelMeta, TrainConfig, TrainOutcome};

use crate::circuit::CircuitError;
use crate::diagonal::DiagonalError;
use crate::numkit::NumError;

#[derive(Debug, Error)]
pub enum MlError {
    #[error(transparent)]
    Numeric(#[from] NumError),

    #[error(transparent)]
    Diagonal(#[from] DiagonalError),

    #[error(transparent)]
    Circuit(#[from] CircuitError),

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("X has {x} rows but Y has {y}")]
    RowMismatch { x: usize, y: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("training diverged at epoch {epoch} (loss {loss})")]
    Diverged { epoch: usize, loss: f64 },

    #[error("model expects {expected} inputs, dataset has {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("malformed dataset file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type MlResult<T> = Result<T, MlError>;
