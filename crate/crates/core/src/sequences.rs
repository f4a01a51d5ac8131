//! CNOT control-label sequences for the diagonal-circuit tails.
//!
//! Labels are 1-indexed: label `k` is control qubit `k − 1`, and every CNOT of
//! the tail targets qubit `n − 1`. Two constructions are provided:
//!
//! * **Strange fractal**: `a₂ = {1}`, `aₙ = aₙ₋₁ ∘ (n − aₙ₋₁)`, full tail
//!   `Aₙ = aₙ ∘ aₙ`.
//! * **Binary tree**: `a₁ = ∅`, `aₙ = (aₙ₋₁ + 1) ∘ {1} ∘ (aₙ₋₁ + 1)`, full
//!   tail `Aₙ = {1} ∘ aₙ`.
//!
//! Both full tails have `2ⁿ⁻¹` labels.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SequenceError {
    #[error("label {label} at position {position} is outside [1, {max}]")]
    LabelOutOfRange {
        label: i64,
        position: usize,
        max: i64,
    },

    #[error("sequences need at least 2 qubits, got {0}")]
    TooFewQubits(usize),

    #[error("unknown sequence kind {0:?} (expected tree or fractal)")]
    UnknownKind(String),
}

pub type SequenceResult<T> = Result<T, SequenceError>;

/// Which recursion generates the tail controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SequenceKind {
    #[default]
    BinaryTree,
    StrangeFractal,
}

impl SequenceKind {
    pub const ALL: [SequenceKind; 2] = [SequenceKind::BinaryTree, SequenceKind::StrangeFractal];
}

impl fmt::Display for SequenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SequenceKind::BinaryTree => "tree",
            SequenceKind::StrangeFractal => "fractal",
        })
    }
}

impl FromStr for SequenceKind {
    type Err = SequenceError;

    fn from_str(s: &str) -> SequenceResult<Self> {
        match s {
            "tree" | "binary_tree" => Ok(SequenceKind::BinaryTree),
            "fractal" | "strange_fractal" => Ok(SequenceKind::StrangeFractal),
            other => Err(SequenceError::UnknownKind(other.to_string())),
        }
    }
}

/// Ordered 1-indexed control labels for an `n`-qubit tail.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ControlSequence {
    labels: Vec<usize>,
    n: usize,
}

impl ControlSequence {
    /// Validates that every label lies in `[1, n − 1]`.
    pub fn new(labels: Vec<usize>, n: usize) -> SequenceResult<Self> {
        let max = n as i64 - 1;
        if let Some((position, &label)) = labels
            .iter()
            .enumerate()
            .find(|(_, &l)| l == 0 || l as i64 > max)
        {
            return Err(SequenceError::LabelOutOfRange {
                label: label as i64,
                position,
                max,
            });
        }
        Ok(Self { labels, n })
    }

    pub fn empty(n: usize) -> Self {
        Self { labels: Vec::new(), n }
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// `self ∘ other`.
    pub fn concat(&self, other: &Self) -> Self {
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        Self {
            labels,
            n: self.n.max(other.n),
        }
    }

    /// `self + m`; the register grows (or shrinks) with the labels.
    pub fn shift(&self, m: i64) -> SequenceResult<Self> {
        let n = (self.n as i64 + m).max(1) as usize;
        self.map_labels(n, |l| l + m)
    }

    /// `k − self`, each label reflected through `k`.
    pub fn reflect(&self, k: usize) -> SequenceResult<Self> {
        let n = self.n.max(k);
        self.map_labels(n, |l| k as i64 - l)
    }

    fn map_labels(&self, n: usize, f: impl Fn(i64) -> i64) -> SequenceResult<Self> {
        let max = n as i64 - 1;
        let mut labels = Vec::with_capacity(self.labels.len());
        for (position, &l) in self.labels.iter().enumerate() {
            let label = f(l as i64);
            if label < 1 || label > max {
                return Err(SequenceError::LabelOutOfRange { label, position, max });
            }
            labels.push(label as usize);
        }
        Ok(Self { labels, n })
    }

    /// Physical control qubits (label − 1).
    pub fn control_qubits(&self) -> impl Iterator<Item = usize> + '_ {
        self.labels.iter().map(|l| l - 1)
    }
}

impl fmt::Display for ControlSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.labels.iter().map(usize::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

/// Half sequence `aₙ` of the strange-fractal construction, `|aₙ| = 2ⁿ⁻²`.
pub fn strange_fractal_half(n: usize) -> SequenceResult<ControlSequence> {
    if n < 2 {
        return Err(SequenceError::TooFewQubits(n));
    }
    let mut a = ControlSequence::new(vec![1], 2)?;
    for m in 3..=n {
        a = a.concat(&a.reflect(m)?);
    }
    Ok(a)
}

/// Auxiliary binary-tree sequence `aₙ` (in-order walk of a perfect binary
/// tree of height `n − 1` with depth-based labels), `|aₙ| = 2ⁿ⁻¹ − 1`.
pub fn binary_tree_aux(n: usize) -> SequenceResult<ControlSequence> {
    let mut a = ControlSequence::empty(1);
    for _ in 2..=n {
        let child = a.shift(1)?;
        a = child.concat(&ControlSequence::new(vec![1], 2)?).concat(&child);
    }
    Ok(a)
}

/// Full binary-tree tail `Aₙ = {1} ∘ aₙ`.
pub fn binary_tree_full(n: usize) -> SequenceResult<ControlSequence> {
    if n < 2 {
        return Err(SequenceError::TooFewQubits(n));
    }
    Ok(ControlSequence::new(vec![1], 2)?.concat(&binary_tree_aux(n)?))
}

/// Full strange-fractal tail `Aₙ = aₙ ∘ aₙ`.
pub fn strange_fractal_full(n: usize) -> SequenceResult<ControlSequence> {
    let a = strange_fractal_half(n)?;
    Ok(a.concat(&a))
}

fn build_full(n: usize, kind: SequenceKind) -> SequenceResult<ControlSequence> {
    match kind {
        SequenceKind::BinaryTree => binary_tree_full(n),
        SequenceKind::StrangeFractal => strange_fractal_full(n),
    }
}

type Cache = RwLock<HashMap<(usize, SequenceKind), Arc<ControlSequence>>>;

/// Memoised full tail sequence for `n` qubits.
pub fn full_sequence(n: usize, kind: SequenceKind) -> SequenceResult<Arc<ControlSequence>> {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(seq) = cache.read().expect("sequence cache poisoned").get(&(n, kind)) {
        return Ok(Arc::clone(seq));
    }
    let seq = Arc::new(build_full(n, kind)?);
    cache
        .write()
        .expect("sequence cache poisoned")
        .insert((n, kind), Arc::clone(&seq));
    Ok(seq)
}

/// RZ and CNOT counts of the full tail on the last qubit (`2ⁿ⁻¹` each).
pub fn tail_lengths(n: usize) -> SequenceResult<(usize, usize)> {
    if n < 2 {
        return Err(SequenceError::TooFewQubits(n));
    }
    let len = 1usize << (n - 1);
    Ok((len, len))
}

/// RZ and CNOT totals of the whole recursive circuit: `(2ⁿ − 1, 2ⁿ − 2)`.
pub fn gate_totals(n: usize) -> (usize, usize) {
    let rz = (1usize << n) - 1;
    (rz, rz.saturating_sub(1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(labels: &[usize], n: usize) -> ControlSequence {
        ControlSequence::new(labels.to_vec(), n).unwrap()
    }

    #[test]
    fn algebra() {
        assert_eq!(seq(&[1, 2], 3).concat(&seq(&[3], 4)).labels(), &[1, 2, 3]);
        assert_eq!(seq(&[1, 2], 3).shift(1).unwrap().labels(), &[2, 3]);
        assert_eq!(seq(&[1, 2], 3).reflect(4).unwrap().labels(), &[3, 2]);
    }

    #[test]
    fn out_of_range_labels() {
        assert!(matches!(
            seq(&[1, 2], 3).shift(-1),
            Err(SequenceError::LabelOutOfRange { label: 0, position: 0, .. })
        ));
        assert!(seq(&[1, 2], 3).reflect(2).is_err());
        assert!(ControlSequence::new(vec![3], 3).is_err());
        assert!(ControlSequence::new(vec![0], 3).is_err());
    }

    #[test]
    fn strange_fractal_examples() {
        assert_eq!(strange_fractal_half(2).unwrap().labels(), &[1]);
        assert_eq!(strange_fractal_half(3).unwrap().labels(), &[1, 2]);
        assert_eq!(strange_fractal_half(4).unwrap().labels(), &[1, 2, 3, 2]);
        assert_eq!(
            strange_fractal_half(5).unwrap().labels(),
            &[1, 2, 3, 2, 4, 3, 2, 3]
        );
        assert_eq!(
            strange_fractal_full(4).unwrap().to_string(),
            "1,2,3,2,1,2,3,2"
        );
        assert_eq!(strange_fractal_half(1), Err(SequenceError::TooFewQubits(1)));
    }

    #[test]
    fn binary_tree_examples() {
        assert_eq!(binary_tree_full(2).unwrap().labels(), &[1, 1]);
        assert_eq!(binary_tree_full(3).unwrap().labels(), &[1, 2, 1, 2]);
        assert_eq!(
            binary_tree_full(4).unwrap().labels(),
            &[1, 3, 2, 3, 1, 3, 2, 3]
        );
        assert_eq!(binary_tree_full(0), Err(SequenceError::TooFewQubits(0)));
    }

    #[test]
    fn lengths_and_label_ranges() {
        for n in 2..=16 {
            let sf = strange_fractal_half(n).unwrap();
            let bt = binary_tree_full(n).unwrap();
            assert_eq!(sf.len(), 1 << (n - 2));
            assert_eq!(bt.len(), 1 << (n - 1));
            for s in [&sf, &bt] {
                assert_eq!(s.n(), n);
                assert!(s.labels().iter().all(|&l| (1..n).contains(&l)));
            }
            // Leaves of the perfect binary tree carry the deepest label.
            let leaves = bt.labels().iter().filter(|&&l| l == n - 1).count();
            let expected = if n == 2 { 2 } else { 1 << (n - 2) };
            assert_eq!(leaves, expected, "n = {n}");
        }
    }

    #[test]
    fn every_control_returns_the_target() {
        // Each label occurs an even number of times, so the tail's CNOTs
        // compose to the identity permutation.
        for n in 2..=10 {
            for kind in SequenceKind::ALL {
                let s = full_sequence(n, kind).unwrap();
                for label in 1..n {
                    let count = s.labels().iter().filter(|&&l| l == label).count();
                    assert_eq!(count % 2, 0, "{kind} n={n} label={label}");
                }
            }
        }
    }

    #[test]
    fn totals() {
        assert_eq!(tail_lengths(3).unwrap(), (4, 4));
        let sum = |n| {
            let (rz, cx) = gate_totals(n);
            rz + cx
        };
        assert_eq!(gate_totals(2), (3, 2));
        assert_eq!(sum(2), 5);
        assert_eq!(sum(3), 13);
        assert_eq!(sum(9), 1021);
        assert_eq!(gate_totals(1), (1, 0));
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("tree".parse::<SequenceKind>().unwrap(), SequenceKind::BinaryTree);
        assert_eq!("fractal".parse::<SequenceKind>().unwrap(), SequenceKind::StrangeFractal);
        assert!("spiral".parse::<SequenceKind>().is_err());
    }

    #[test]
    fn cache_returns_shared_value() {
        let a = full_sequence(6, SequenceKind::BinaryTree).unwrap();
        let b = full_sequence(6, SequenceKind::BinaryTree).unwrap();
        assert!(Arc::ptr_eq(&a, &b));
    }
}
