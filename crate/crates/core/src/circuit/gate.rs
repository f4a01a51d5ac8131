use num_complex::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GateKind {
    Rz,
    Rx,
    Ry,
    X,
    H,
    Cnot,
}

impl GateKind {
    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rz => "rz",
            GateKind::Rx => "rx",
            GateKind::Ry => "ry",
            GateKind::X => "x",
            GateKind::H => "h",
            GateKind::Cnot => "cx",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Gate {
    Rz { qubit: usize, angle: f64 },
    Rx { qubit: usize, angle: f64 },
    Ry { qubit: usize, angle: f64 },
    X { qubit: usize },
    H { qubit: usize },
    Cnot { control: usize, target: usize },
}

impl Gate {
    pub fn rz(qubit: usize, angle: f64) -> Self {
        Gate::Rz { qubit, angle }
    }

    pub fn rx(qubit: usize, angle: f64) -> Self {
        Gate::Rx { qubit, angle }
    }

    pub fn ry(qubit: usize, angle: f64) -> Self {
        Gate::Ry { qubit, angle }
    }

    pub fn x(qubit: usize) -> Self {
        Gate::X { qubit }
    }

    pub fn h(qubit: usize) -> Self {
        Gate::H { qubit }
    }

    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }

    pub fn kind(&self) -> GateKind {
        match self {
            Gate::Rz { .. } => GateKind::Rz,
            Gate::Rx { .. } => GateKind::Rx,
            Gate::Ry { .. } => GateKind::Ry,
            Gate::X { .. } => GateKind::X,
            Gate::H { .. } => GateKind::H,
            Gate::Cnot { .. } => GateKind::Cnot,
        }
    }

    /// Qubit the gate acts on (the target for a CNOT).
    pub fn target(&self) -> usize {
        match *self {
            Gate::Rz { qubit, .. }
            | Gate::Rx { qubit, .. }
            | Gate::Ry { qubit, .. }
            | Gate::X { qubit }
            | Gate::H { qubit } => qubit,
            Gate::Cnot { target, .. } => target,
        }
    }

    pub fn control(&self) -> Option<usize> {
        match *self {
            Gate::Cnot { control, .. } => Some(control),
            _ => None,
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match *self {
            Gate::Rz { angle, .. } | Gate::Rx { angle, .. } | Gate::Ry { angle, .. } => Some(angle),
            _ => None,
        }
    }

    /// Every wire the gate occupies.
    pub fn qubits(&self) -> impl Iterator<Item = usize> {
        self.control().into_iter().chain(std::iter::once(self.target()))
    }

    /// 2x2 matrix of a single-qubit gate, row-major; `None` for CNOT.
    pub fn single_qubit_matrix(&self) -> Option<[Complex64; 4]> {
        let c = |re: f64, im: f64| Complex64::new(re, im);
        Some(match *self {
            Gate::Rz { angle, .. } => {
                let h = angle / 2.0;
                [c(h.cos(), -h.sin()), c(0.0, 0.0), c(0.0, 0.0), c(h.cos(), h.sin())]
            }
            Gate::Rx { angle, .. } => {
                let (s, co) = (angle / 2.0).sin_cos();
                [c(co, 0.0), c(0.0, -s), c(0.0, -s), c(co, 0.0)]
            }
            Gate::Ry { angle, .. } => {
                let (s, co) = (angle / 2.0).sin_cos();
                [c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)]
            }
            Gate::X { .. } => [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
            Gate::H { .. } => {
                let h = std::f64::consts::FRAC_1_SQRT_2;
                [c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]
            }
            Gate::Cnot { .. } => return None,
        })
    }
}
