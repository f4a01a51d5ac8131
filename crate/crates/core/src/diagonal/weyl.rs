use num_complex::Complex64;
use serde::Serialize;

use super::DiagonalResult;
use crate::circuit::{diag_phases, unitary_of, Circuit, Gate};
use crate::numkit::{matmul, ComplexMatrix};
use crate::tol;

/// Two-qubit tail `CNOT · (I ⊗ RZ(φ)) · CNOT`, equal to `exp(−(i/2)·φ·Z⊗Z)`.
pub fn zz_tail(phi: f64) -> Circuit {
    Circuit::from_gates(2, [Gate::cnot(0, 1), Gate::rz(1, phi), Gate::cnot(0, 1)])
        .expect("fixed two-qubit layout")
}

/// Coefficients `(c_xx, c_yy, c_zz)` of `H = Σ c_P·P⊗P + …` for a Hermitian
/// two-qubit generator, from `c_P = tr(H·(P⊗P))/4`.
pub fn interaction_coefficients(h: &ComplexMatrix) -> [f64; 3] {
    let c = |re: f64, im: f64| Complex64::new(re, im);
    let o = c(0.0, 0.0);
    let paulis = [
        [o, c(1.0, 0.0), c(1.0, 0.0), o],
        [o, c(0.0, -1.0), c(0.0, 1.0), o],
        [c(1.0, 0.0), o, o, c(-1.0, 0.0)],
    ];
    paulis.map(|p| {
        let p = ComplexMatrix::new(2, 2, p.to_vec()).expect("2x2 Pauli");
        let pp = p.kron(&p);
        let prod = matmul(h, &pp).expect("4x4 operands");
        prod.diagonal().iter().sum::<Complex64>().re / 4.0
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeylReport {
    pub phi: f64,
    /// Unwrapped diagonal phases of the tail.
    pub phases: [f64; 4],
    /// Entrywise distance between the tail unitary and `exp(−(i/2)·φ·Z⊗Z)`.
    pub max_deviation: f64,
    /// `(c_xx, c_yy, c_zz)` of the generator `diag(phases)`.
    pub coefficients: [f64; 3],
    /// The same coefficients ordered by decreasing magnitude: `(g_z, 0, 0)`.
    pub coordinates: [f64; 3],
    pub g_z: f64,
    pub pass: bool,
}

/// Checks the two-qubit tail against the closed-form `Z⊗Z` exponential and
/// reads off its interaction coefficients.
pub fn weyl_tail_check(phi: f64) -> DiagonalResult<WeylReport> {
    let c = zz_tail(phi);
    let u = unitary_of(&c)?;
    let zz = [1.0, -1.0, -1.0, 1.0];
    let expected = ComplexMatrix::from_fn(4, 4, |i, j| {
        if i == j {
            Complex64::from_polar(1.0, -phi / 2.0 * zz[i])
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let max_deviation = u.max_abs_diff(&expected).expect("both 4x4");

    let p = diag_phases(&c)?.into_vec();
    let phases = [p[0], p[1], p[2], p[3]];
    let h = ComplexMatrix::from_fn(4, 4, |i, j| {
        if i == j {
            Complex64::new(phases[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let coefficients = interaction_coefficients(&h);
    let mut coordinates = coefficients;
    coordinates.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let g_z = coefficients[2];
    let small = tol::IDENTITY;
    let pass = max_deviation < small
        && coefficients[0].abs() < small
        && coefficients[1].abs() < small
        && (g_z + phi / 2.0).abs() < small * phi.abs().max(1.0);
    Ok(WeylReport {
        phi,
        phases,
        max_deviation,
        coefficients,
        coordinates,
        g_z,
        pass,
    })
}
