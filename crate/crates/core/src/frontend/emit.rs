//! OpenQASM 2.0 output.

use std::fmt::Write as _;

use super::{Circuit, Gate};

fn angle(a: f64) -> String {
    format!("{a:?}")
}

/// Writes `circuit` as OpenQASM 2.0 over one `q` register (and `c` when
/// measured). Angles are printed in round-trip precision.
pub fn emit_qasm(circuit: &Circuit) -> String {
    let mut s = String::from("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
    if !circuit.name.is_empty() {
        let _ = writeln!(s, "// {}", circuit.name);
    }
    let _ = writeln!(s, "qreg q[{}];", circuit.n_qubits);
    if !circuit.measurements.is_empty() {
        let nc = circuit.measurements.iter().map(|m| m.clbit + 1).max().unwrap_or(0);
        let _ = writeln!(s, "creg c[{nc}];");
    }
    for (i, g) in circuit.gates.iter().enumerate() {
        if circuit.barriers.contains(&i) {
            s.push_str("barrier q;\n");
        }
        let line = match *g {
            Gate::H(q) => format!("h q[{q}];"),
            Gate::X(q) => format!("x q[{q}];"),
            Gate::Y(q) => format!("y q[{q}];"),
            Gate::Z(q) => format!("z q[{q}];"),
            Gate::S(q) => format!("s q[{q}];"),
            Gate::Sdg(q) => format!("sdg q[{q}];"),
            Gate::T(q) => format!("t q[{q}];"),
            Gate::Tdg(q) => format!("tdg q[{q}];"),
            Gate::Rx(q, a) => format!("rx({}) q[{q}];", angle(a)),
            Gate::Ry(q, a) => format!("ry({}) q[{q}];", angle(a)),
            Gate::Rz(q, a) => format!("rz({}) q[{q}];", angle(a)),
            Gate::U1(q, a) => format!("u1({}) q[{q}];", angle(a)),
            Gate::U2(q, a, b) => format!("u2({},{}) q[{q}];", angle(a), angle(b)),
            Gate::U3 { qubit, theta, phi, lambda } => {
                format!("u3({},{},{}) q[{qubit}];", angle(theta), angle(phi), angle(lambda))
            }
            Gate::Cx(a, b) => format!("cx q[{a}],q[{b}];"),
            Gate::Cz(a, b) => format!("cz q[{a}],q[{b}];"),
            Gate::Swap(a, b) => format!("swap q[{a}],q[{b}];"),
        };
        s.push_str(&line);
        s.push('\n');
    }
    for m in &circuit.measurements {
        let _ = writeln!(s, "measure q[{}] -> c[{}];", m.qubit, m.clbit);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_openqasm, Measurement};
    use proptest::prelude::*;

    #[test]
    fn round_trip_with_barrier_and_measure() {
        let mut c = Circuit::with_gates("rt", 3, vec![Gate::H(0), Gate::Cx(0, 1), Gate::u3(2, 0.1, -0.2, 1e-7)]);
        c.barriers = vec![2];
        c.measurements = vec![Measurement { qubit: 2, clbit: 0 }];
        let back = parse_openqasm(&emit_qasm(&c)).unwrap();
        assert_eq!(back.gates, c.gates);
        assert_eq!(back.barriers, c.barriers);
        assert_eq!(back.measurements, c.measurements);
    }

    proptest! {
        #[test]
        fn gates_round_trip(v in proptest::collection::vec((0usize..6, 0usize..4, 1usize..4, -10.0f64..10.0), 0..20)) {
            let gates: Vec<Gate> = v.into_iter().map(|(k, a, d, x)| {
                let b = (a + d) % 4;
                match k {
                    0 => Gate::Rx(a, x),
                    1 => Gate::U2(a, x, -x / 3.0),
                    2 => Gate::u3(a, x, x * 0.5, -x),
                    3 => Gate::Cz(a, b),
                    4 => Gate::Swap(a, b),
                    _ => Gate::Tdg(a),
                }
            }).collect();
            let c = Circuit::with_gates("", 4, gates);
            prop_assert_eq!(parse_openqasm(&emit_qasm(&c)).unwrap().gates, c.gates);
        }
    }
}
