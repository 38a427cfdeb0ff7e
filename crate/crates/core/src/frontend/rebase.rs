//! Rewrites parsed circuits into the native {U3, CZ} basis.

use crate::linalg::{hadamard_matrix, is_zero_angle, u3_params, Mat2};

use super::{Circuit, Gate};

const IDENTITY_TOL: f64 = 1e-12;

struct Rebaser {
    out: Vec<Gate>,
    pending: Vec<Option<Mat2>>,
}

impl Rebaser {
    fn apply_1q(&mut self, q: usize, m: Mat2) {
        let slot = &mut self.pending[q];
        *slot = Some(match slot.take() {
            Some(prev) => m * prev,
            None => m,
        });
    }

    fn flush(&mut self, q: usize) {
        if let Some(m) = self.pending[q].take() {
            let (theta, phi, lambda) = u3_params(&m);
            if is_zero_angle(theta, IDENTITY_TOL) && is_zero_angle(phi + lambda, IDENTITY_TOL) {
                return;
            }
            self.out.push(Gate::u3(q, theta, phi, lambda));
        }
    }

    fn flush_all(&mut self) {
        for q in 0..self.pending.len() {
            self.flush(q);
        }
    }

    fn cz(&mut self, a: usize, b: usize) {
        self.flush(a);
        self.flush(b);
        self.out.push(Gate::Cz(a, b));
    }

    fn cx(&mut self, a: usize, b: usize) {
        self.apply_1q(b, hadamard_matrix());
        self.cz(a, b);
        self.apply_1q(b, hadamard_matrix());
    }
}

/// Lowers every gate to U3/CZ and fuses runs of single-qubit gates.
///
/// Pending single-qubit products are flushed when a CZ touches the qubit, at
/// barriers, and at the end in qubit order. Fused identities are dropped.
pub fn rebase_to_native(circuit: &Circuit) -> Circuit {
    let mut r = Rebaser { out: Vec::with_capacity(circuit.gates.len()), pending: vec![None; circuit.n_qubits] };
    let mut barriers = Vec::new();
    let mut next_barrier = circuit.barriers.iter().peekable();
    for (i, g) in circuit.gates.iter().enumerate() {
        while next_barrier.next_if(|&&b| b <= i).is_some() {
            r.flush_all();
            if !r.out.is_empty() && barriers.last() != Some(&r.out.len()) {
                barriers.push(r.out.len());
            }
        }
        match *g {
            Gate::Cz(a, b) => r.cz(a, b),
            Gate::Cx(a, b) => r.cx(a, b),
            Gate::Swap(a, b) => {
                r.cx(a, b);
                r.cx(b, a);
                r.cx(a, b);
            }
            ref single => {
                let q = single.qubits()[0];
                r.apply_1q(q, single.matrix_1q().expect("single-qubit gate"));
            }
        }
    }
    r.flush_all();
    if barriers.last() == Some(&r.out.len()) {
        barriers.pop();
    }
    Circuit {
        name: circuit.name.clone(),
        n_qubits: circuit.n_qubits,
        gates: r.out,
        barriers,
        measurements: circuit.measurements.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(g: &Gate, q: usize, t: f64, p: f64, l: f64) -> bool {
        match *g {
            Gate::U3 { qubit, theta, phi, lambda } => {
                qubit == q && (theta - t).abs() < 1e-12 && (phi - p).abs() < 1e-12 && (lambda - l).abs() < 1e-12
            }
            _ => false,
        }
    }

    #[test]
    fn hadamard_becomes_u3() {
        let c = rebase_to_native(&Circuit::with_gates("h", 1, vec![Gate::H(0)]));
        assert_eq!(c.gates.len(), 1);
        assert!(close(&c.gates[0], 0, PI / 2.0, 0.0, PI), "{:?}", c.gates);
    }

    #[test]
    fn cx_is_conjugated_cz() {
        let c = rebase_to_native(&Circuit::with_gates("cx", 2, vec![Gate::Cx(0, 1)]));
        assert_eq!(c.gates.len(), 3);
        assert!(close(&c.gates[0], 1, PI / 2.0, 0.0, PI));
        assert_eq!(c.gates[1], Gate::Cz(0, 1));
        assert!(close(&c.gates[2], 1, PI / 2.0, 0.0, PI));
    }

    #[test]
    fn adjacent_gates_fuse_and_identities_vanish() {
        let c = rebase_to_native(&Circuit::with_gates("hh", 1, vec![Gate::H(0), Gate::H(0)]));
        assert!(c.gates.is_empty());
        let c = rebase_to_native(&Circuit::with_gates("st", 1, vec![Gate::S(0), Gate::T(0), Gate::X(0)]));
        assert_eq!(c.gates.len(), 1);
    }

    #[test]
    fn barrier_positions_follow_output() {
        let mut c = Circuit::with_gates("b", 2, vec![Gate::H(0), Gate::H(1), Gate::Cx(0, 1)]);
        c.barriers = vec![2];
        let r = rebase_to_native(&c);
        assert_eq!(r.barriers, vec![2]);
        assert!(r.is_native());
    }
}
