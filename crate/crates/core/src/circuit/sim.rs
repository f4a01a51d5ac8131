use num_complex::Complex64;

use super::{qubit_mask, Circuit, CircuitError, CircuitResult, Gate, PhaseVector};
use crate::numkit::ComplexMatrix;

/// Largest register [`unitary_of`] will expand into a dense matrix.
pub const MAX_DENSE_QUBITS: usize = 12;

/// Dense `2ⁿ × 2ⁿ` unitary of the circuit, including its global phase.
pub fn unitary_of(c: &Circuit) -> CircuitResult<ComplexMatrix> {
    let n = c.n();
    if n > MAX_DENSE_QUBITS {
        return Err(CircuitError::TooManyQubits {
            n,
            max: MAX_DENSE_QUBITS,
        });
    }
    let dim = 1usize << n;
    let mut u = ComplexMatrix::identity(dim);
    // Each gate left-multiplies the accumulated operator, i.e. acts on rows.
    for g in c.gates() {
        match *g {
            Gate::Cnot { control, target } => {
                let (cm, tm) = (qubit_mask(n, control), qubit_mask(n, target));
                for row in 0..dim {
                    if row & cm != 0 && row & tm == 0 {
                        swap_rows(&mut u, row, row | tm);
                    }
                }
            }
            _ => {
                let m = g.single_qubit_matrix().expect("single-qubit gate");
                let tm = qubit_mask(n, g.target());
                for r0 in (0..dim).filter(|r| r & tm == 0) {
                    let r1 = r0 | tm;
                    for col in 0..dim {
                        let (a, b) = (u.get(r0, col), u.get(r1, col));
                        u.set(r0, col, m[0] * a + m[1] * b);
                        u.set(r1, col, m[2] * a + m[3] * b);
                    }
                }
            }
        }
    }
    let phase = Complex64::from_polar(1.0, c.global_phase());
    Ok(u.map(|z| z * phase))
}

fn swap_rows(u: &mut ComplexMatrix, a: usize, b: usize) {
    for col in 0..u.cols() {
        let tmp = u.get(a, col);
        u.set(a, col, u.get(b, col));
        u.set(b, col, tmp);
    }
}

/// Diagonal phases of an RZ/X/CNOT circuit by propagating every basis state.
///
/// Costs `O(gates · 2ⁿ)`. Phases are accumulated without wrapping and include
/// the circuit's global phase.
pub fn diag_phases(c: &Circuit) -> CircuitResult<PhaseVector> {
    let states: Vec<usize> = (0..1usize << c.n()).collect();
    let phases = propagate(c, &states)?;
    PhaseVector::new(c.n(), phases)
}

/// [`diag_phases`] restricted to the listed basis states.
pub fn diag_phases_at(c: &Circuit, states: &[usize]) -> CircuitResult<Vec<f64>> {
    propagate(c, states)
}

fn propagate(c: &Circuit, states: &[usize]) -> CircuitResult<Vec<f64>> {
    let n = c.n();
    let mut label = states.to_vec();
    let mut phase = vec![c.global_phase(); states.len()];
    for (index, g) in c.gates().iter().enumerate() {
        match *g {
            Gate::Rz { qubit, angle } => {
                let m = qubit_mask(n, qubit);
                let half = angle / 2.0;
                for (p, &l) in phase.iter_mut().zip(&label) {
                    *p += if l & m == 0 { -half } else { half };
                }
            }
            Gate::X { qubit } => {
                let m = qubit_mask(n, qubit);
                label.iter_mut().for_each(|l| *l ^= m);
            }
            Gate::Cnot { control, target } => {
                let (cm, tm) = (qubit_mask(n, control), qubit_mask(n, target));
                for l in label.iter_mut() {
                    if *l & cm != 0 {
                        *l ^= tm;
                    }
                }
            }
            _ => {
                return Err(CircuitError::NonDiagonalGate {
                    index,
                    kind: g.kind(),
                })
            }
        }
    }
    if let Some((&state, &image)) = states.iter().zip(&label).find(|(s, l)| s != l) {
        return Err(CircuitError::NotDiagonal { state, image });
    }
    Ok(phase)
}
