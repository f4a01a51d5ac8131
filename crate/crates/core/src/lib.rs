//! Synthesis of diagonal unitaries into minimal RZ+CNOT circuits.
//!
//! A diagonal operator `diag(e^{iλ₀}, …, e^{iλ_{2ⁿ−1}})` is realised by a
//! recursive ansatz: the circuit for `n−1` qubits followed by a tail of
//! alternating `RZ`/`CNOT` gates on the last qubit whose controls follow a
//! [`sequences::ControlSequence`]. The map from the `2ⁿ−1` rotation angles to
//! the phases is linear with entries `±1/2` ([`diagonal::PhaseMap`]), so
//! decomposition is a single fast Walsh–Hadamard transform.
//!
//! The [`mlpipe`] and [`cluster`] modules rebuild the linear-model workflow that
//! uncovers this map from data: dataset generation, clustering of circuit
//! families, full-batch gradient descent with a harmonic plateau schedule and
//! lattice analysis of the learned weights.

#![allow(clippy::needless_range_loop)]

pub mod circuit;
pub mod cluster;
pub mod diagonal;
pub mod mlpipe;
pub mod numkit;
pub mod rng;
pub mod sequences;
pub mod tol;
