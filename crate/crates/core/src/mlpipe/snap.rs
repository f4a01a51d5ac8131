use serde::Serialize;

use super::train::LinearModel;
use super::{MlError, MlResult};
use crate::diagonal::PhaseMap;
use crate::numkit::RealMatrix;
use crate::tol;

/// How snapped weights relate to a reference phase map.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MapMatch {
    Exact,
    /// Row `i` of the weights equals row `permutation[i]` of the map.
    RowPermuted { permutation: Vec<usize> },
    Mismatch { max_difference: f64 },
    ShapeDiffers {
        expected: (usize, usize),
        found: (usize, usize),
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SnapReport {
    pub step: f64,
    #[serde(serialize_with = "rows")]
    pub snapped: RealMatrix,
    pub max_deviation: f64,
    pub lattice_structured: bool,
    /// Left and right column halves agree within the block tolerance.
    pub duplicated_halves: bool,
    pub comparison: Option<MapMatch>,
}

fn rows<S: serde::Serializer>(m: &RealMatrix, s: S) -> Result<S::Ok, S::Error> {
    serde::Serialize::serialize(&m.to_rows(), s)
}

/// Rounds every weight to the nearest multiple of `step` and, given a map,
/// compares the result against it. A model whose columns are two copies of
/// the map (doubled raw template) is compared through its left half.
pub fn snap_weights(model: &LinearModel, step: f64, map: Option<&PhaseMap>) -> MlResult<SnapReport> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(MlError::InvalidParameter(format!("snap step {step} must be positive")));
    }
    let w = &model.w;
    let snapped = w.map(|v| (v / step).round() * step);
    let max_deviation = w.max_abs_diff(&snapped).unwrap_or(0.0);
    let duplicated_halves = halves_match(w);
    let comparison = match map {
        None => None,
        Some(map) => {
            let dense = map.dense()?;
            let candidate = if snapped.cols() == 2 * dense.cols() && duplicated_halves {
                left_half(&snapped)
            } else {
                snapped.clone()
            };
            Some(compare(&candidate, &dense))
        }
    };
    Ok(SnapReport {
        step,
        snapped,
        max_deviation,
        lattice_structured: max_deviation <= tol::LATTICE_DEVIATION,
        duplicated_halves,
        comparison,
    })
}

fn halves_match(w: &RealMatrix) -> bool {
    let c = w.cols();
    if c == 0 || !c.is_multiple_of(2) {
        return false;
    }
    let h = c / 2;
    (0..w.rows()).all(|i| {
        let r = w.row(i);
        r[..h].iter().zip(&r[h..]).all(|(a, b)| (a - b).abs() <= tol::BLOCK_MATCH)
    })
}

fn left_half(m: &RealMatrix) -> RealMatrix {
    RealMatrix::from_fn(m.rows(), m.cols() / 2, |i, j| m.get(i, j))
}

fn compare(w: &RealMatrix, reference: &RealMatrix) -> MapMatch {
    if w.shape() != reference.shape() {
        return MapMatch::ShapeDiffers {
            expected: reference.shape(),
            found: w.shape(),
        };
    }
    let max_difference = w.max_abs_diff(reference).unwrap_or(f64::INFINITY);
    if max_difference <= tol::SNAP {
        return MapMatch::Exact;
    }
    let same = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol::SNAP);
    let mut used = vec![false; reference.rows()];
    let mut permutation = Vec::with_capacity(w.rows());
    for i in 0..w.rows() {
        let hit = (0..reference.rows()).find(|&k| !used[k] && same(w.row(i), reference.row(k)));
        match hit {
            Some(k) => {
                used[k] = true;
                permutation.push(k);
            }
            None => return MapMatch::Mismatch { max_difference },
        }
    }
    MapMatch::RowPermuted { permutation }
}
