use super::{DiagonalError, DiagonalResult, MAX_QUBITS};
use crate::circuit::{Circuit, Gate};
use crate::sequences::{full_sequence, SequenceKind};

/// Number of free angles of the `n`-qubit ansatz.
pub fn angle_count(n: usize) -> usize {
    (1usize << n) - 1
}

/// Recursive diagonal circuit on `n` qubits.
///
/// The first `2ⁿ⁻¹ − 1` angles build the `(n − 1)`-qubit circuit on qubits
/// `0..n−1`; the rest alternate RZ/CNOT on qubit `n − 1`, one RZ before each
/// CNOT of the tail sequence.
pub fn build_ansatz(n: usize, angles: &[f64], kind: SequenceKind) -> DiagonalResult<Circuit> {
    check_qubits(n)?;
    let expected = angle_count(n);
    if angles.len() != expected {
        return Err(DiagonalError::AngleCount {
            n,
            expected,
            found: angles.len(),
        });
    }
    let mut c = Circuit::with_capacity(n, 2 * expected);
    c.push(Gate::rz(0, angles[0]))?;
    let mut next = 1;
    for target in 1..n {
        let seq = full_sequence(target + 1, kind)?;
        for control in seq.control_qubits() {
            c.push(Gate::rz(target, angles[next]))?;
            c.push(Gate::cnot(control, target))?;
            next += 1;
        }
    }
    debug_assert_eq!(next, expected);
    Ok(c)
}

pub(super) fn check_qubits(n: usize) -> DiagonalResult<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(DiagonalError::QubitCount { n, max: MAX_QUBITS });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{unitary_of, GateKind};
    use crate::numkit::ComplexMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn zero_angles_give_identity() {
        for kind in SequenceKind::ALL {
            let c = build_ansatz(2, &[0.0; 3], kind).unwrap();
            let u = unitary_of(&c).unwrap();
            assert!(u.max_abs_diff(&ComplexMatrix::identity(4)).unwrap() < 1e-15);
            assert_eq!(c.global_phase(), 0.0);
        }
    }

    #[test]
    fn single_qubit_is_one_rz() {
        let c = build_ansatz(1, &[0.3], SequenceKind::BinaryTree).unwrap();
        assert_eq!(c.gates(), &[Gate::rz(0, 0.3)]);
    }

    #[test]
    fn two_qubit_scheme() {
        let c = build_ansatz(2, &[0.1, 0.2, 0.3], SequenceKind::StrangeFractal).unwrap();
        assert_eq!(
            c.gates(),
            &[
                Gate::rz(0, 0.1),
                Gate::rz(1, 0.2),
                Gate::cnot(0, 1),
                Gate::rz(1, 0.3),
                Gate::cnot(0, 1)
            ]
        );
    }

    #[test]
    fn angles_are_consumed_in_order() {
        let angles: Vec<f64> = (0..15).map(f64::from).collect();
        let c = build_ansatz(4, &angles, SequenceKind::BinaryTree).unwrap();
        assert_eq!(c.angles(), angles);
        let tail: Vec<Gate> = c.gates()[13..].to_vec();
        assert_eq!(tail[0], Gate::rz(3, 7.0));
        assert_eq!(tail[1], Gate::cnot(0, 3));
        assert_eq!(tail[3], Gate::cnot(2, 3));
    }

    #[test]
    fn gate_totals_match_closed_form() {
        for n in 1..=12 {
            for kind in SequenceKind::ALL {
                let c = build_ansatz(n, &vec![0.0; angle_count(n)], kind).unwrap();
                assert_eq!(c.count(GateKind::Rz), (1 << n) - 1);
                assert_eq!(c.count(GateKind::Cnot), (1 << n) - 2);
                assert_eq!(c.len(), (1 << (n + 1)) - 3);
            }
        }
        let c = build_ansatz(3, &[0.0; 7], SequenceKind::BinaryTree).unwrap();
        assert_eq!(c.len(), 13);
        assert!(c.depth() <= 13);
    }

    #[test]
    fn random_three_qubit_ansatz_is_diagonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for kind in SequenceKind::ALL {
            let angles: Vec<f64> = (0..7).map(|_| rng.gen_range(-PI..PI)).collect();
            let u = unitary_of(&build_ansatz(3, &angles, kind).unwrap()).unwrap();
            assert!(u.max_off_diagonal() < 1e-12);
        }
    }

    #[test]
    fn wrong_angle_count() {
        assert_eq!(
            build_ansatz(3, &[0.0; 6], SequenceKind::BinaryTree).unwrap_err(),
            DiagonalError::AngleCount {
                n: 3,
                expected: 7,
                found: 6
            }
        );
        assert!(build_ansatz(0, &[], SequenceKind::BinaryTree).is_err());
    }
}
