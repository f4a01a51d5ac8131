use std::collections::HashMap;
use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dataset::{pad_rows, Dataset, DatasetMeta, Stage};
use super::{MlError, MlResult};
use crate::circuit::{diag_phases, wrap_angle, Circuit};
use crate::diagonal::{angle_count, apply_characters, build_ansatz, Character, PhaseMap};
use crate::numkit::RealMatrix;
use crate::rng;
use crate::sequences::SequenceKind;

/// Half-width of the pretty-data angle cube (cube side 0.05).
pub const DEFAULT_EPSILON: f64 = 0.025;

/// Largest pretty-data half-width accepted.
pub const MAX_PRETTY_EPSILON: f64 = 0.1;

/// Half-width of the raw-data target phases.
pub const DEFAULT_RAW_DELTA: f64 = 0.25;

/// Angles drawn uniformly from `[−ε, ε]^{2ⁿ−1}`, phases from the simulator.
pub fn gen_pretty(
    n: usize,
    samples: usize,
    epsilon: f64,
    seed: u64,
    kind: SequenceKind,
) -> MlResult<Dataset> {
    if !(0.0..=MAX_PRETTY_EPSILON).contains(&epsilon) {
        return Err(MlError::InvalidParameter(format!(
            "epsilon {epsilon} outside [0, {MAX_PRETTY_EPSILON}]"
        )));
    }
    let cols = angle_count(n);
    let rows: Vec<(Vec<f64>, Vec<f64>)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, rng::purpose::DATASET + i as u64);
            let x: Vec<f64> = (0..cols)
                .map(|_| if epsilon > 0.0 { r.gen_range(-epsilon..=epsilon) } else { 0.0 })
                .collect();
            let y = diag_phases(&build_ansatz(n, &x, kind)?)?.into_vec();
            Ok((x, y))
        })
        .collect::<MlResult<_>>()?;
    let (xs, ys): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let meta = DatasetMeta {
        n,
        sequence_kind: kind,
        epsilon: Some(epsilon),
        seed,
        stage: Stage::Pretty,
    };
    Dataset::new(to_matrix(&xs, cols)?, to_matrix(&ys, 1 << n)?, meta)
}

fn to_matrix(rows: &[Vec<f64>], cols: usize) -> MlResult<RealMatrix> {
    if rows.is_empty() {
        return Ok(RealMatrix::zeros(0, cols));
    }
    Ok(RealMatrix::from_rows(rows)?)
}

/// Circuit layout that produced a raw-data row.
///
/// `doubled` runs the ansatz twice with the angles split between the copies,
/// so the row holds `2·(2ⁿ − 1)` angles; `jumped` adds π to a fixed triple of
/// angles whose responses cancel up to a global phase.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RawTemplate {
    pub doubled: bool,
    pub jumped: bool,
}

impl RawTemplate {
    pub fn id(self) -> usize {
        usize::from(self.doubled) * 2 + usize::from(self.jumped)
    }

    pub fn from_id(id: usize) -> Self {
        Self {
            doubled: id & 2 != 0,
            jumped: id & 1 != 0,
        }
    }

    pub fn width(self, n: usize) -> usize {
        angle_count(n) * if self.doubled { 2 } else { 1 }
    }

    /// Rebuilds the circuit from a (possibly padded) parameter row.
    pub fn circuit(self, n: usize, kind: SequenceKind, row: &[f64]) -> MlResult<Circuit> {
        let cols = angle_count(n);
        if row.len() < self.width(n) {
            return Err(MlError::ShapeMismatch {
                expected: self.width(n),
                found: row.len(),
            });
        }
        let mut c = build_ansatz(n, &row[..cols], kind)?;
        if self.doubled {
            for &g in build_ansatz(n, &row[cols..2 * cols], kind)?.gates() {
                c.push(g)?;
            }
        }
        Ok(c)
    }
}

/// Knobs of the raw-data emulation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawConfig {
    /// Target phases are uniform in `[−δ, δ]` before centring.
    pub delta: f64,
    /// Probability of a π-jump on the fixed angle triple.
    pub mutation_prob: f64,
    /// Probability of the doubled layout.
    pub doubled_prob: f64,
    pub sequence_kind: SequenceKind,
}

impl Default for RawConfig {
    fn default() -> Self {
        Self {
            delta: DEFAULT_RAW_DELTA,
            mutation_prob: 0.25,
            doubled_prob: 0.25,
            sequence_kind: SequenceKind::BinaryTree,
        }
    }
}

/// First triple `j < k < l` whose masks XOR to zero and whose joint π shift
/// changes every phase by the same amount modulo 2π.
pub fn pi_jump_triple(n: usize, chars: &[Character]) -> Option<[usize; 3]> {
    let index: HashMap<usize, usize> = chars.iter().enumerate().map(|(j, c)| (c.mask, j)).collect();
    for j in 0..chars.len() {
        for k in j + 1..chars.len() {
            let Some(&l) = index.get(&(chars[j].mask ^ chars[k].mask)) else { continue };
            if l <= k {
                continue;
            }
            let mut shift = vec![0.0; chars.len()];
            for t in [j, k, l] {
                shift[t] = PI;
            }
            let phases = apply_characters(n, chars, &shift).ok()?;
            if phases.iter().all(|p| wrap_angle(p - phases[0]).abs() < 1e-9) {
                return Some([j, k, l]);
            }
        }
    }
    None
}

/// Emulates heterogeneous decompositions of random diagonals.
///
/// Each target `λ` (uniform in `[−δ, δ]`, centred) is synthesised exactly,
/// then re-expressed with a randomly chosen [`RawTemplate`]. Rows are padded
/// with [`SENTINEL`] to the longest layout present; `Y = λ`.
pub fn gen_raw(n: usize, samples: usize, seed: u64, config: &RawConfig) -> MlResult<Dataset> {
    if !(2..=3).contains(&n) {
        return Err(MlError::InvalidParameter(format!("raw data supports n in 2..=3, got {n}")));
    }
    for (name, p) in [("mutation_prob", config.mutation_prob), ("doubled_prob", config.doubled_prob)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(MlError::InvalidParameter(format!("{name} = {p} outside [0, 1]")));
        }
    }
    if !(config.delta > 0.0 && config.delta.is_finite()) {
        return Err(MlError::InvalidParameter(format!("delta = {}", config.delta)));
    }
    let kind = config.sequence_kind;
    let map = PhaseMap::cached(n, kind)?;
    let triple = pi_jump_triple(n, map.columns())
        .ok_or_else(|| MlError::InvalidParameter("ansatz has no π-jump triple".into()))?;
    let dim = 1usize << n;

    let rows: Vec<(Vec<f64>, Vec<f64>, usize)> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, rng::purpose::DATASET + i as u64);
            let mut lambda: Vec<f64> = (0..dim).map(|_| r.gen_range(-config.delta..=config.delta)).collect();
            let mean = lambda.iter().sum::<f64>() / dim as f64;
            lambda.iter_mut().for_each(|v| *v -= mean);
            let template = RawTemplate {
                doubled: r.gen_bool(config.doubled_prob),
                jumped: r.gen_bool(config.mutation_prob),
            };
            let theta = map.solve(&lambda)?;
            let mut x = if template.doubled {
                let split: Vec<f64> = theta.iter().map(|t| t * r.gen::<f64>()).collect();
                let mut x: Vec<f64> = theta.iter().zip(&split).map(|(t, b)| t - b).collect();
                x.extend(split);
                x
            } else {
                theta
            };
            if template.jumped {
                for t in triple {
                    x[t] += PI;
                }
            }
            Ok((x, lambda, template.id()))
        })
        .collect::<MlResult<_>>()?;

    let xs: Vec<Vec<f64>> = rows.iter().map(|r| r.0.clone()).collect();
    let ys: Vec<Vec<f64>> = rows.iter().map(|r| r.1.clone()).collect();
    let templates: Vec<usize> = rows.iter().map(|r| r.2).collect();
    let width = xs.iter().map(Vec::len).max().unwrap_or(angle_count(n));
    let meta = DatasetMeta {
        n,
        sequence_kind: kind,
        epsilon: None,
        seed,
        stage: Stage::Raw,
    };
    Dataset::new(to_matrix(&pad_rows(&xs), width)?, to_matrix(&ys, dim)?, meta)?.with_templates(templates)
}
