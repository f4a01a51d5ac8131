//! Gate-level circuit IR, a dense unitary simulator, a fast phase-propagation
//! simulator for diagonal circuits, and an OpenQASM 2 exporter.
//!
//! Conventions used throughout the crate:
//!
//! * `RZ(θ) = diag(e^{−iθ/2}, e^{+iθ/2})`.
//! * Qubit 0 is the most significant bit of a basis index, i.e. the state
//!   space is `q0 ⊗ q1 ⊗ … ⊗ q_{n−1}`.
//! * Gates are listed in application order; the circuit unitary is
//!   `e^{iφ} · G_last ⋯ G_first`.

mod gate;
mod qasm;
mod sim;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use gate::{Gate, GateKind};
pub use qasm::export_text;
pub use sim::{diag_phases, diag_phases_at, unitary_of, MAX_DENSE_QUBITS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("gate {gate:?} addresses qubit {qubit}, but the circuit has {n} qubits")]
    QubitOutOfRange { gate: Gate, qubit: usize, n: usize },

    #[error("CNOT control and target coincide on qubit {0}")]
    SelfControlled(usize),

    #[error("gate {0:?} has a non-finite angle")]
    NonFiniteAngle(Gate),

    #[error("dense simulation of {n} qubits exceeds the limit of {max}")]
    TooManyQubits { n: usize, max: usize },

    #[error("gate {index} ({kind:?}) does not preserve the computational basis")]
    NonDiagonalGate { index: usize, kind: GateKind },

    #[error("circuit is not diagonal: basis state {state} ends on {image}")]
    NotDiagonal { state: usize, image: usize },

    #[error("phase vector for {n} qubits needs {expected} entries, got {found}")]
    PhaseLength {
        n: usize,
        expected: usize,
        found: usize,
    },

    #[error("phase {index} is not finite")]
    NonFinitePhase { index: usize },
}

pub type CircuitResult<T> = Result<T, CircuitError>;

/// Bit mask of `qubit` inside a basis index of an `n`-qubit register.
#[inline]
pub fn qubit_mask(n: usize, qubit: usize) -> usize {
    1 << (n - 1 - qubit)
}

/// Maps an angle into `(−π, π]`.
pub fn wrap_angle(x: f64) -> f64 {
    let r = x.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// Ordered gate list on `n` qubits with an explicit global phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    n: usize,
    gates: Vec<Gate>,
    global_phase: f64,
}

impl Circuit {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            gates: Vec::new(),
            global_phase: 0.0,
        }
    }

    pub fn with_capacity(n: usize, gates: usize) -> Self {
        Self {
            n,
            gates: Vec::with_capacity(gates),
            global_phase: 0.0,
        }
    }

    pub fn from_gates(n: usize, gates: impl IntoIterator<Item = Gate>) -> CircuitResult<Self> {
        let mut c = Self::new(n);
        for g in gates {
            c.push(g)?;
        }
        Ok(c)
    }

    pub fn push(&mut self, gate: Gate) -> CircuitResult<()> {
        for q in gate.qubits() {
            if q >= self.n {
                return Err(CircuitError::QubitOutOfRange {
                    gate,
                    qubit: q,
                    n: self.n,
                });
            }
        }
        if let Gate::Cnot { control, target } = gate {
            if control == target {
                return Err(CircuitError::SelfControlled(control));
            }
        }
        if gate.angle().is_some_and(|a| !a.is_finite()) {
            return Err(CircuitError::NonFiniteAngle(gate));
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn global_phase(&self) -> f64 {
        self.global_phase
    }

    pub fn set_global_phase(&mut self, phase: f64) {
        self.global_phase = phase;
    }

    /// Rotation angles in gate order.
    pub fn angles(&self) -> Vec<f64> {
        self.gates.iter().filter_map(Gate::angle).collect()
    }

    /// Longest chain of gates along the per-qubit timelines.
    pub fn depth(&self) -> usize {
        let mut level = vec![0usize; self.n];
        for g in &self.gates {
            let next = g.qubits().map(|q| level[q]).max().unwrap_or(0) + 1;
            for q in g.qubits() {
                level[q] = next;
            }
        }
        level.into_iter().max().unwrap_or(0)
    }

    pub fn gate_counts(&self) -> BTreeMap<GateKind, usize> {
        let mut counts = BTreeMap::new();
        for g in &self.gates {
            *counts.entry(g.kind()).or_insert(0) += 1;
        }
        counts
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind() == kind).count()
    }
}

/// Phases `λ` of a diagonal operator on `n` qubits, indexed by basis state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseVector {
    n: usize,
    phases: Vec<f64>,
}

impl PhaseVector {
    pub fn new(n: usize, phases: Vec<f64>) -> CircuitResult<Self> {
        let expected = 1usize << n;
        if phases.len() != expected {
            return Err(CircuitError::PhaseLength {
                n,
                expected,
                found: phases.len(),
            });
        }
        if let Some(index) = phases.iter().position(|p| !p.is_finite()) {
            return Err(CircuitError::NonFinitePhase { index });
        }
        Ok(Self { n, phases })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            phases: vec![0.0; 1 << n],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.phases
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.phases
    }

    /// Canonical form with every entry in `(−π, π]`.
    pub fn wrapped(&self) -> Self {
        Self {
            n: self.n,
            phases: self.phases.iter().map(|&p| wrap_angle(p)).collect(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.phases.iter().sum::<f64>() / self.phases.len() as f64
    }

    /// `max_x |wrap(self[x] − other[x])|`; `None` when sizes differ.
    pub fn max_wrapped_distance(&self, other: &Self) -> Option<f64> {
        (self.n == other.n).then(|| {
            self.phases
                .iter()
                .zip(&other.phases)
                .map(|(a, b)| wrap_angle(a - b).abs())
                .fold(0.0, f64::max)
        })
    }

    /// Like [`Self::max_wrapped_distance`] after removing the best common offset,
    /// taken as the wrapped difference on basis state 0.
    pub fn max_distance_up_to_global(&self, other: &Self) -> Option<f64> {
        if self.n != other.n {
            return None;
        }
        let offset = wrap_angle(self.phases[0] - other.phases[0]);
        Some(
            self.phases
                .iter()
                .zip(&other.phases)
                .map(|(a, b)| wrap_angle(a - b - offset).abs())
                .fold(0.0, f64::max),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_circuit_has_zero_depth() {
        assert_eq!(Circuit::new(3).depth(), 0);
    }

    #[test]
    fn single_cnot() {
        let c = Circuit::from_gates(2, [Gate::cnot(0, 1)]).unwrap();
        assert_eq!(c.depth(), 1);
        assert_eq!(c.gate_counts(), BTreeMap::from([(GateKind::Cnot, 1)]));
    }

    #[test]
    fn depth_on_parallel_and_serial_wires() {
        // Three gates on wire 0, one on wire 1, nothing shared: depth = 3.
        let c = Circuit::from_gates(
            2,
            [Gate::rz(0, 0.1), Gate::x(0), Gate::rz(0, 0.2), Gate::h(1)],
        )
        .unwrap();
        assert_eq!(c.depth(), 3);
        // A CNOT synchronises both wires.
        let c = Circuit::from_gates(
            2,
            [Gate::rz(0, 0.1), Gate::rz(0, 0.2), Gate::cnot(0, 1), Gate::rz(1, 0.3)],
        )
        .unwrap();
        assert_eq!(c.depth(), 4);
    }

    #[test]
    fn gate_validation() {
        let mut c = Circuit::new(2);
        assert!(matches!(
            c.push(Gate::rz(2, 0.0)),
            Err(CircuitError::QubitOutOfRange { qubit: 2, .. })
        ));
        assert_eq!(
            c.push(Gate::cnot(1, 1)),
            Err(CircuitError::SelfControlled(1))
        );
        assert!(matches!(
            c.push(Gate::rz(0, f64::INFINITY)),
            Err(CircuitError::NonFiniteAngle(_))
        ));
        assert!(c.is_empty());
    }

    #[test]
    fn phase_vector_validation_and_wrapping() {
        assert!(matches!(
            PhaseVector::new(2, vec![0.0; 3]),
            Err(CircuitError::PhaseLength { expected: 4, .. })
        ));
        assert!(PhaseVector::new(1, vec![0.0, f64::NAN]).is_err());
        let p = PhaseVector::new(1, vec![3.0 * PI, -PI]).unwrap().wrapped();
        assert!((p.as_slice()[0] - PI).abs() < 1e-12);
        assert!((p.as_slice()[1] - PI).abs() < 1e-12);
    }

    #[test]
    fn wrap_range() {
        for x in [-10.0, -PI, -1.0, 0.0, 1.0, PI, 7.5] {
            let w = wrap_angle(x);
            assert!(w > -PI && w <= PI, "{x} -> {w}");
            let k = (x - w) / (2.0 * PI);
            assert!((k - k.round()).abs() < 1e-12);
        }
    }
}
