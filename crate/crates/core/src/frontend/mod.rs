//! Gate-level circuits: OpenQASM 2.0 ingestion, rebasing to {U3, CZ} and the
//! gate dependency DAG.

mod dag;
mod emit;
mod parse;
mod rebase;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::ops::Deref;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{rx_matrix, ry_matrix, rz_matrix, u3_matrix, Mat2};

pub use dag::{build_dag, GateDag};
pub use emit::emit_qasm;
pub use parse::parse_openqasm;
pub use rebase::rebase_to_native;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrontendError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("line {line}: unsupported gate or statement `{name}`")]
    UnsupportedGate { line: usize, name: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    X(usize),
    Y(usize),
    Z(usize),
    S(usize),
    Sdg(usize),
    T(usize),
    Tdg(usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    U1(usize, f64),
    U2(usize, f64, f64),
    U3 { qubit: usize, theta: f64, phi: f64, lambda: f64 },
    Cx(usize, usize),
    Cz(usize, usize),
    Swap(usize, usize),
}

/// The one or two qubits a gate acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Qubits {
    q: [usize; 2],
    n: usize,
}

impl Deref for Qubits {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.q[..self.n]
    }
}

impl Gate {
    pub fn u3(qubit: usize, theta: f64, phi: f64, lambda: f64) -> Gate {
        Gate::U3 { qubit, theta, phi, lambda }
    }

    pub fn qubits(&self) -> Qubits {
        use Gate::*;
        match *self {
            H(q)
            | X(q)
            | Y(q)
            | Z(q)
            | S(q)
            | Sdg(q)
            | T(q)
            | Tdg(q)
            | Rx(q, _)
            | Ry(q, _)
            | Rz(q, _)
            | U1(q, _)
            | U2(q, _, _)
            | U3 { qubit: q, .. } => Qubits { q: [q, 0], n: 1 },
            Cx(a, b) | Cz(a, b) | Swap(a, b) => Qubits { q: [a, b], n: 2 },
        }
    }

    /// Number of qubits the gate acts on.
    pub fn size(&self) -> usize {
        self.qubits().len()
    }

    pub fn is_native(&self) -> bool {
        matches!(self, Gate::U3 { .. } | Gate::Cz(..))
    }

    /// Unitary of a single-qubit gate (exact, including global phase).
    pub fn matrix_1q(&self) -> Option<Mat2> {
        use Gate::*;
        let m = match *self {
            H(_) => crate::linalg::hadamard_matrix(),
            X(_) => u3_matrix(PI, 0.0, PI),
            Y(_) => u3_matrix(PI, FRAC_PI_2, FRAC_PI_2),
            Z(_) => u3_matrix(0.0, 0.0, PI),
            S(_) => u3_matrix(0.0, 0.0, FRAC_PI_2),
            Sdg(_) => u3_matrix(0.0, 0.0, -FRAC_PI_2),
            T(_) => u3_matrix(0.0, 0.0, FRAC_PI_4),
            Tdg(_) => u3_matrix(0.0, 0.0, -FRAC_PI_4),
            Rx(_, a) => rx_matrix(a),
            Ry(_, a) => ry_matrix(a),
            Rz(_, a) => rz_matrix(a),
            U1(_, l) => u3_matrix(0.0, 0.0, l),
            U2(_, p, l) => u3_matrix(FRAC_PI_2, p, l),
            U3 { theta, phi, lambda, .. } => u3_matrix(theta, phi, lambda),
            Cx(..) | Cz(..) | Swap(..) => return None,
        };
        Some(m)
    }

    /// Same gate acting on remapped qubits.
    pub fn map_qubits(&self, f: impl Fn(usize) -> usize) -> Gate {
        use Gate::*;
        match *self {
            H(q) => H(f(q)),
            X(q) => X(f(q)),
            Y(q) => Y(f(q)),
            Z(q) => Z(f(q)),
            S(q) => S(f(q)),
            Sdg(q) => Sdg(f(q)),
            T(q) => T(f(q)),
            Tdg(q) => Tdg(f(q)),
            Rx(q, a) => Rx(f(q), a),
            Ry(q, a) => Ry(f(q), a),
            Rz(q, a) => Rz(f(q), a),
            U1(q, a) => U1(f(q), a),
            U2(q, a, b) => U2(f(q), a, b),
            U3 { qubit, theta, phi, lambda } => U3 { qubit: f(qubit), theta, phi, lambda },
            Cx(a, b) => Cx(f(a), f(b)),
            Cz(a, b) => Cz(f(a), f(b)),
            Swap(a, b) => Swap(f(a), f(b)),
        }
    }
}

/// A recorded terminal measurement `measure q[qubit] -> c[clbit]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Measurement {
    pub qubit: usize,
    pub clbit: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Circuit {
    pub name: String,
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    /// Gate indices before which a barrier was declared.
    #[serde(default)]
    pub barriers: Vec<usize>,
    #[serde(default)]
    pub measurements: Vec<Measurement>,
}

impl Circuit {
    pub fn new(name: impl Into<String>, n_qubits: usize) -> Self {
        Circuit { name: name.into(), n_qubits, gates: Vec::new(), barriers: Vec::new(), measurements: Vec::new() }
    }

    pub fn with_gates(name: impl Into<String>, n_qubits: usize, gates: Vec<Gate>) -> Self {
        Circuit { gates, ..Circuit::new(name, n_qubits) }
    }

    pub fn push(&mut self, gate: Gate) -> &mut Self {
        self.gates.push(gate);
        self
    }

    pub fn is_native(&self) -> bool {
        self.gates.iter().all(Gate::is_native)
    }

    /// Every qubit index in range and two-qubit gates on distinct qubits.
    pub fn validate(&self) -> Result<(), String> {
        for (i, g) in self.gates.iter().enumerate() {
            let qs = g.qubits();
            if let Some(q) = qs.iter().find(|&&q| q >= self.n_qubits) {
                return Err(format!("gate {i} uses qubit {q} outside [0, {})", self.n_qubits));
            }
            if qs.len() == 2 && qs[0] == qs[1] {
                return Err(format!("gate {i} acts twice on qubit {}", qs[0]));
            }
        }
        Ok(())
    }

    pub fn cz_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cz(..))).count()
    }
}
