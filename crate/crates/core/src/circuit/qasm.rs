use std::fmt::Write;

use super::{Circuit, Gate};

/// Renders the circuit as OpenQASM 2.0.
///
/// Angles use Rust's shortest round-trip float formatting (at most 17
/// significant digits), so re-parsing reproduces the exact `f64` values. The
/// global phase has no QASM 2 statement and is written as a comment when
/// non-zero.
pub fn export_text(c: &Circuit) -> String {
    let mut out = String::new();
    out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    if c.global_phase() != 0.0 {
        let _ = writeln!(out, "// global_phase: {}", c.global_phase());
    }
    let _ = writeln!(out, "qreg q[{}];", c.n());
    for g in c.gates() {
        let _ = match *g {
            Gate::Rz { qubit, angle } => writeln!(out, "rz({angle}) q[{qubit}];"),
            Gate::Rx { qubit, angle } => writeln!(out, "rx({angle}) q[{qubit}];"),
            Gate::Ry { qubit, angle } => writeln!(out, "ry({angle}) q[{qubit}];"),
            Gate::X { qubit } => writeln!(out, "x q[{qubit}];"),
            Gate::H { qubit } => writeln!(out, "h q[{qubit}];"),
            Gate::Cnot { control, target } => writeln!(out, "cx q[{control}],q[{target}];"),
        };
    }
    out
}
