//! Dense-unitary equivalence for small circuits.

use num_complex::Complex64 as C64;

use crate::frontend::{Circuit, Gate};
use crate::linalg::Mat2;

/// Entry tolerance for dense comparisons.
pub const ORACLE_TOL: f64 = 1e-9;

fn apply_1q(m: &mut [C64], dim: usize, q: usize, g: &Mat2) {
    let bit = 1 << q;
    for r in 0..dim {
        if r & bit != 0 {
            continue;
        }
        let r1 = r | bit;
        let (top, bottom) = (r * dim, r1 * dim);
        for c in 0..dim {
            let (a, b) = (m[top + c], m[bottom + c]);
            m[top + c] = g.0[0][0] * a + g.0[0][1] * b;
            m[bottom + c] = g.0[1][0] * a + g.0[1][1] * b;
        }
    }
}

fn swap_rows(m: &mut [C64], dim: usize, r0: usize, r1: usize) {
    for c in 0..dim {
        m.swap(r0 * dim + c, r1 * dim + c);
    }
}

/// Left-multiplies `m` (row-major, `dim` x `dim`) by `gate`, or by its
/// adjoint when `dagger` is set. Qubit `q` is bit `q` of the row index.
fn apply(m: &mut [C64], dim: usize, gate: &Gate, dagger: bool) {
    match *gate {
        Gate::Cz(a, b) => {
            let mask = (1 << a) | (1 << b);
            for r in (0..dim).filter(|r| r & mask == mask) {
                for c in 0..dim {
                    m[r * dim + c] = -m[r * dim + c];
                }
            }
        }
        Gate::Cx(c, t) => {
            for r in (0..dim).filter(|r| r & (1 << c) != 0 && r & (1 << t) == 0) {
                swap_rows(m, dim, r, r | (1 << t));
            }
        }
        Gate::Swap(a, b) => {
            for r in (0..dim).filter(|r| r & (1 << a) != 0 && r & (1 << b) == 0) {
                swap_rows(m, dim, r, (r & !(1 << a)) | (1 << b));
            }
        }
        _ => {
            let g = gate.matrix_1q().expect("single-qubit gate");
            let g = if dagger { g.adjoint() } else { g };
            apply_1q(m, dim, gate.qubits()[0], &g);
        }
    }
}

fn identity(dim: usize) -> Vec<C64> {
    let mut m = vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        m[i * dim + i] = C64::new(1.0, 0.0);
    }
    m
}

/// Row-major unitary of `circuit`.
pub fn unitary(circuit: &Circuit) -> Vec<C64> {
    let dim = 1 << circuit.n_qubits;
    let mut m = identity(dim);
    for g in &circuit.gates {
        apply(&mut m, dim, g, false);
    }
    m
}

/// `U2 * U1^dagger` for equal-width circuits.
pub fn relative_unitary(c1: &Circuit, c2: &Circuit) -> Vec<C64> {
    let dim = 1 << c1.n_qubits;
    let mut m = identity(dim);
    for g in c1.gates.iter().rev() {
        apply(&mut m, dim, g, true);
    }
    for g in &c2.gates {
        apply(&mut m, dim, g, false);
    }
    m
}

/// `Ok(phase)` when `m` is `e^{i phase} I` within tolerance, otherwise the
/// first offending entry.
pub fn scalar_identity(m: &[C64], dim: usize) -> Result<f64, (usize, usize, C64)> {
    let d0 = m[0];
    for r in 0..dim {
        for c in 0..dim {
            let z = m[r * dim + c];
            let bad = if r == c { (z - d0).norm() > ORACLE_TOL } else { z.norm() > ORACLE_TOL };
            if bad {
                return Err((r, c, z));
            }
        }
    }
    Ok(d0.arg())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn x_matches_u3() {
        let a = Circuit::with_gates("x", 1, vec![Gate::X(0)]);
        let b = Circuit::with_gates("u", 1, vec![Gate::u3(0, PI, 0.0, PI)]);
        let phase = scalar_identity(&relative_unitary(&a, &b), 2).unwrap();
        // U3(pi, 0, pi) = X exactly
        assert!(phase.abs() < 1e-12);
    }

    #[test]
    fn x_differs_from_z() {
        let a = Circuit::with_gates("x", 1, vec![Gate::X(0)]);
        let b = Circuit::with_gates("z", 1, vec![Gate::Z(0)]);
        assert!(scalar_identity(&relative_unitary(&a, &b), 2).is_err());
    }

    #[test]
    fn cx_decomposes() {
        let a = Circuit::with_gates("cx", 2, vec![Gate::Cx(0, 1)]);
        let b = Circuit::with_gates("hczh", 2, vec![Gate::H(1), Gate::Cz(0, 1), Gate::H(1)]);
        assert!(scalar_identity(&relative_unitary(&a, &b), 4).is_ok());
        let s = Circuit::with_gates("swap", 2, vec![Gate::Swap(0, 1)]);
        let s3 = Circuit::with_gates("3cx", 2, vec![Gate::Cx(0, 1), Gate::Cx(1, 0), Gate::Cx(0, 1)]);
        assert!(scalar_identity(&relative_unitary(&s, &s3), 4).is_ok());
    }

    #[test]
    fn qubit_order_is_little_endian() {
        let u = unitary(&Circuit::with_gates("x1", 2, vec![Gate::X(1)]));
        // |00> -> |10>, i.e. index 0 -> index 2
        assert!((u[2 * 4] - C64::new(1.0, 0.0)).norm() < 1e-12);
    }
}
