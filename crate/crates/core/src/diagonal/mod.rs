//! Synthesis of diagonal unitaries into RZ + CNOT circuits.
//!
//! The ansatz on `n` qubits has `2ⁿ − 1` RZ angles and `2ⁿ − 2` CNOTs. Its
//! phase response is an exact linear map `M` whose columns are distinct
//! non-trivial Walsh characters scaled by `±1/2`, so `MᵀM = (2ⁿ/4)·I` and the
//! angles of any diagonal follow from one fast Walsh–Hadamard transform.

mod ansatz;
mod phase_map;
mod rn;
mod weyl;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::circuit::{wrap_angle, Circuit, CircuitError, PhaseVector};
use crate::numkit::NumError;
use crate::sequences::{SequenceError, SequenceKind};
use crate::tol;

pub use ansatz::{angle_count, build_ansatz};
pub use phase_map::{apply_characters, rz_characters, Character, PhaseMap, MAX_DENSE_MAP_QUBITS};
pub use rn::{
    det_relation_check, extract_rn, rn_inverse, rn_matrix, sylvester, sylvester_labeling,
    DetRelationReport, DetRelationRow, RnMatrix, SylvesterLabeling, MAX_RN,
};
pub use weyl::{interaction_coefficients, weyl_tail_check, zz_tail, WeylReport};

/// Largest register the synthesis routines accept.
pub const MAX_QUBITS: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagonalError {
    #[error(transparent)]
    Circuit(#[from] CircuitError),

    #[error(transparent)]
    Sequence(#[from] SequenceError),

    #[error(transparent)]
    Numeric(#[from] NumError),

    #[error("qubit count {n} outside the supported range 1..={max}")]
    QubitCount { n: usize, max: usize },

    #[error("{n}-qubit ansatz takes {expected} angles, got {found}")]
    AngleCount {
        n: usize,
        expected: usize,
        found: usize,
    },

    #[error("phase map of {n} qubits has rank {rank}, expected {expected}")]
    RankDeficient {
        n: usize,
        rank: usize,
        expected: usize,
    },

    #[error("impulse response {value} for column {column} at state {state} is not ±1/2")]
    SnapDeviation {
        column: usize,
        state: usize,
        value: f64,
    },

    #[error("column {column} at state {state}: character predicts {expected}, simulator gives {found}")]
    Inconsistent {
        column: usize,
        state: usize,
        expected: f64,
        found: f64,
    },

    #[error("ansatz phase response deviates from linearity by {deviation:e}")]
    NonLinear { deviation: f64 },

    #[error("phases outside reachable set: residual {residual:e}")]
    Unreachable { residual: f64 },

    #[error("r_{n}: {reason}")]
    RnMismatch { n: usize, reason: String },
}

pub type DiagonalResult<T> = Result<T, DiagonalError>;

/// `diag(e^{iλ₀}, …, e^{iλ_{2ⁿ−1}})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalUnitary {
    lambda: PhaseVector,
}

impl DiagonalUnitary {
    pub fn new(n: usize, lambda: Vec<f64>) -> DiagonalResult<Self> {
        Ok(Self {
            lambda: PhaseVector::new(n, lambda)?,
        })
    }

    /// Builds from a phase list whose length must be a power of two.
    pub fn from_phases(lambda: Vec<f64>) -> DiagonalResult<Self> {
        let len = lambda.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(NumError::NotPowerOfTwo(len).into());
        }
        Self::new(len.trailing_zeros() as usize, lambda)
    }

    pub fn identity(n: usize) -> Self {
        Self {
            lambda: PhaseVector::zeros(n),
        }
    }

    pub fn n(&self) -> usize {
        self.lambda.n()
    }

    pub fn lambda(&self) -> &PhaseVector {
        &self.lambda
    }

    pub fn phases(&self) -> &[f64] {
        self.lambda.as_slice()
    }

    /// Whether the determinant is 1, i.e. `Σλ ≡ 0 (mod 2π)`.
    pub fn is_special(&self, tol: f64) -> bool {
        let sum: f64 = self.phases().iter().sum();
        wrap_angle(sum).abs() <= tol
    }

    /// Adds `c` to every phase.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            lambda: PhaseVector::new(self.n(), self.phases().iter().map(|p| p + c).collect())
                .expect("shift keeps the length"),
        }
    }
}

/// Output of [`decompose`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub circuit: Circuit,
    pub angles: Vec<f64>,
    pub global_phase: f64,
    /// `‖M·angles − (λ − mean λ)‖_∞`.
    pub residual: f64,
}

/// Synthesises `d` as the ansatz of the given kind.
///
/// The global phase is the mean of `λ`; the angles solve `M·θ = λ − mean`.
pub fn decompose(d: &DiagonalUnitary, kind: SequenceKind) -> DiagonalResult<Decomposition> {
    let n = d.n();
    let map = PhaseMap::cached(n, kind)?;
    decompose_with(&map, d)
}

/// [`decompose`] against an already built map.
pub fn decompose_with(map: &PhaseMap, d: &DiagonalUnitary) -> DiagonalResult<Decomposition> {
    let n = d.n();
    if map.n() != n {
        return Err(CircuitError::PhaseLength {
            n: map.n(),
            expected: map.rows(),
            found: d.phases().len(),
        }
        .into());
    }
    let global_phase = d.lambda().mean();
    let centered: Vec<f64> = d.phases().iter().map(|p| p - global_phase).collect();
    let angles = map.solve(&centered)?;
    let recomposed = map.apply(&angles)?;
    let residual = recomposed
        .iter()
        .zip(&centered)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let scale = centered.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    if residual.is_nan() || residual > tol::RESIDUAL * scale {
        return Err(DiagonalError::Unreachable { residual });
    }
    let mut circuit = build_ansatz(n, &angles, map.kind())?;
    circuit.set_global_phase(global_phase);
    Ok(Decomposition {
        circuit,
        angles,
        global_phase,
        residual,
    })
}

/// `λ_m = (m + N − 1)·2m·φ` for `m = 1..=N`.
pub fn tbar_squared(dim: usize, phi: f64) -> Vec<f64> {
    (1..=dim)
        .map(|m| ((m + dim - 1) * 2 * m) as f64 * phi)
        .collect()
}

/// [`tbar_squared`] on a `2ⁿ`-dimensional register.
pub fn tbar_squared_unitary(n: usize, phi: f64) -> DiagonalResult<DiagonalUnitary> {
    DiagonalUnitary::new(n, tbar_squared(1 << n, phi))
}

/// Uniform random phases in `(−π, π]` for tests and benchmarks.
pub fn random_diagonal(n: usize, rng: &mut impl rand::Rng) -> DiagonalUnitary {
    let lambda = (0..1usize << n).map(|_| rng.gen_range(-PI..PI)).collect();
    DiagonalUnitary::new(n, lambda).expect("length matches n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::diag_phases;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn recompose_error(d: &DiagonalUnitary, dec: &Decomposition) -> f64 {
        let back = diag_phases(&dec.circuit).unwrap();
        back.max_wrapped_distance(d.lambda()).unwrap()
    }

    #[test]
    fn identity_gives_zero_angles() {
        let dec = decompose(&DiagonalUnitary::identity(3), SequenceKind::BinaryTree).unwrap();
        assert!(dec.angles.iter().all(|&a| a == 0.0));
        assert_eq!(dec.global_phase, 0.0);
        assert_eq!(dec.residual, 0.0);
    }

    #[test]
    fn tbar_values() {
        assert_eq!(tbar_squared(2, 0.0), vec![0.0, 0.0]);
        let t = tbar_squared(2, 0.1);
        assert!((t[0] - 0.4).abs() < 1e-15 && (t[1] - 1.2).abs() < 1e-15);
        let (a, b) = (tbar_squared(8, 0.37), tbar_squared(8, 0.74));
        for (x, y) in a.iter().zip(&b) {
            assert!((2.0 * x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn tbar_round_trip() {
        let d = tbar_squared_unitary(2, 0.1).unwrap();
        let expected = [0.8, 2.0, 3.6, 5.6];
        for (p, e) in d.phases().iter().zip(expected) {
            assert!((p - e).abs() < 1e-12);
        }
        for kind in SequenceKind::ALL {
            let dec = decompose(&d, kind).unwrap();
            assert!(recompose_error(&d, &dec) < 1e-10);
        }
    }

    #[test]
    fn random_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for n in 1..=8 {
            for kind in SequenceKind::ALL {
                for _ in 0..20 {
                    let d = random_diagonal(n, &mut rng);
                    let dec = decompose(&d, kind).unwrap();
                    assert!(dec.residual < 1e-12);
                    assert!(recompose_error(&d, &dec) < 1e-9);
                }
            }
        }
    }

    #[test]
    fn special_unitaries_have_zero_global_phase() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut lambda: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mean = lambda.iter().sum::<f64>() / 8.0;
        lambda.iter_mut().for_each(|v| *v -= mean);
        let d = DiagonalUnitary::new(3, lambda).unwrap();
        assert!(d.is_special(1e-12));
        let dec = decompose(&d, SequenceKind::BinaryTree).unwrap();
        assert!(dec.global_phase.abs() < 1e-15);
    }

    #[test]
    fn from_phases_checks_length() {
        assert!(DiagonalUnitary::from_phases(vec![0.0; 6]).is_err());
        assert_eq!(DiagonalUnitary::from_phases(vec![0.0; 8]).unwrap().n(), 3);
    }

    #[test]
    fn too_many_qubits() {
        assert!(matches!(
            PhaseMap::build(MAX_QUBITS + 1, SequenceKind::BinaryTree),
            Err(DiagonalError::QubitCount { .. })
        ));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(32))]
        #[test]
        fn global_shift_moves_only_the_phase(seed in 0u64..10_000, n in 1usize..=7, c in -10.0f64..10.0) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = random_diagonal(n, &mut rng);
            let a = decompose(&d, SequenceKind::BinaryTree).unwrap();
            let b = decompose(&d.shifted(c), SequenceKind::BinaryTree).unwrap();
            for (x, y) in a.angles.iter().zip(&b.angles) {
                proptest::prop_assert!((x - y).abs() < 1e-12);
            }
            proptest::prop_assert!((b.global_phase - a.global_phase - c).abs() < 1e-12);
        }

        #[test]
        fn decompose_inverts_apply(seed in 0u64..10_000, n in 1usize..=9, tree in proptest::bool::ANY) {
            let kind = if tree { SequenceKind::BinaryTree } else { SequenceKind::StrangeFractal };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let map = PhaseMap::cached(n, kind).unwrap();
            let angles: Vec<f64> = (0..map.cols()).map(|_| rng.gen_range(-PI..PI)).collect();
            let d = DiagonalUnitary::new(n, map.apply(&angles).unwrap()).unwrap();
            let dec = decompose_with(&map, &d).unwrap();
            for (x, y) in dec.angles.iter().zip(&angles) {
                proptest::prop_assert!((x - y).abs() < 1e-9);
            }
        }
    }
}
