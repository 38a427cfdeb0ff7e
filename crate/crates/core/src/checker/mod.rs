//! Functional-independence checking: rebuild each tile's circuit from the
//! merged program and prove it equal to the source up to global phase.

pub mod oracle;
pub mod zx;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::estimator::rydberg_pairs;
use crate::frontend::{Circuit, Gate};
use crate::hw::HardwareConfig;
use crate::ir::{AtomState, IrError, NAInstruction, NAProgram};

pub use zx::{adjoint_compose, simplify, to_zx, ZxDiagram, ZxError};

/// Default qubit limit for the dense fallback.
pub const DEFAULT_ORACLE_LIMIT: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CheckError {
    #[error(transparent)]
    Replay(#[from] IrError),
    #[error(transparent)]
    Zx(#[from] ZxError),
    #[error("dense oracle limited to {limit} qubits, got {n}")]
    TooLarge { n: usize, limit: usize },
    #[error("circuit has {circuit} qubits but the tile owns {tile}")]
    Arity { circuit: usize, tile: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Zx,
    Oracle,
    Isolation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub equivalent: bool,
    /// `phi` with `U_multi U_solo^dagger = e^{i phi} I`; set iff equivalent.
    pub global_phase: Option<f64>,
    pub witness: Option<String>,
    pub method: Method,
}

impl Verdict {
    fn holds(method: Method, phase: f64) -> Self {
        Verdict { equivalent: true, global_phase: Some(phase), witness: None, method }
    }

    fn fails(method: Method, witness: String) -> Self {
        Verdict { equivalent: false, global_phase: None, witness: Some(witness), method }
    }
}

/// A CZ that would join a tile qubit with a foreign atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IsolationViolation {
    pub instruction: usize,
    pub inside: usize,
    pub outside: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reconstruction {
    pub circuit: Circuit,
    pub violations: Vec<IsolationViolation>,
}

/// Replays `program` and collects the gates acting on `tile_qubits`
/// (global ids), re-indexed to their position in that list.
pub fn reconstruct(
    program: &NAProgram,
    tile_qubits: &[usize],
    hw: &HardwareConfig,
) -> Result<Reconstruction, CheckError> {
    let local = |id: usize| tile_qubits.iter().position(|&q| q == id);
    let mut circuit = Circuit::new("reconstructed", tile_qubits.len());
    let mut violations = Vec::new();
    let mut state = AtomState::default();
    for (index, instr) in program.instructions.iter().enumerate() {
        let atoms = state.apply(index, instr)?;
        match instr {
            NAInstruction::U3Batch { angles, .. } => {
                for (&k, &(t, p, l)) in atoms.iter().zip(angles) {
                    if let Some(q) = local(state.ids[k]) {
                        circuit.push(Gate::u3(q, t, p, l));
                    }
                }
            }
            NAInstruction::Rydberg => {
                for (a, b) in rydberg_pairs(&state, hw) {
                    match (local(a), local(b)) {
                        (Some(x), Some(y)) => {
                            circuit.push(Gate::Cz(x, y));
                        }
                        (Some(_), None) => {
                            violations.push(IsolationViolation { instruction: index, inside: a, outside: b })
                        }
                        (None, Some(_)) => {
                            violations.push(IsolationViolation { instruction: index, inside: b, outside: a })
                        }
                        (None, None) => {}
                    }
                }
            }
            NAInstruction::Init { .. } | NAInstruction::Move { .. } => {}
        }
    }
    Ok(Reconstruction { circuit, violations })
}

/// Dense comparison of two equal-width circuits.
pub fn oracle_equiv(c1: &Circuit, c2: &Circuit, limit: usize) -> Result<Verdict, CheckError> {
    if c1.n_qubits != c2.n_qubits {
        return Err(CheckError::Arity { circuit: c1.n_qubits, tile: c2.n_qubits });
    }
    let n = c1.n_qubits;
    if n > limit {
        return Err(CheckError::TooLarge { n, limit });
    }
    let m = oracle::relative_unitary(c1, c2);
    Ok(match oracle::scalar_identity(&m, 1 << n) {
        Ok(phase) => Verdict::holds(Method::Oracle, phase),
        Err((r, c, z)) => Verdict::fails(Method::Oracle, format!("entry ({r},{c}) = {:.3e}{:+.3e}i", z.re, z.im)),
    })
}

/// ZX equivalence of two circuits; falls back to the dense oracle when the
/// diagram does not reduce and the width is within `oracle_limit`.
pub fn equivalent(original: &Circuit, actual: &Circuit, oracle_limit: usize) -> Result<Verdict, CheckError> {
    if original.n_qubits != actual.n_qubits {
        return Err(CheckError::Arity { circuit: original.n_qubits, tile: actual.n_qubits });
    }
    let d = simplify(&adjoint_compose(&to_zx(original)?, &to_zx(actual)?)?);
    if d.is_bare_wires() {
        return Ok(Verdict::holds(Method::Zx, crate::linalg::normalize_angle(-d.scalar_phase)));
    }
    if original.n_qubits <= oracle_limit {
        return oracle_equiv(original, actual, oracle_limit);
    }
    Ok(Verdict::fails(Method::Zx, format!("inconclusive-residual: {}", d.summary())))
}

/// Checks one tile of a merged program against its rebased source.
pub fn check(
    original: &Circuit,
    merged: &NAProgram,
    tile_qubits: &[usize],
    hw: &HardwareConfig,
    oracle_limit: usize,
) -> Result<Verdict, CheckError> {
    if original.n_qubits != tile_qubits.len() {
        return Err(CheckError::Arity { circuit: original.n_qubits, tile: tile_qubits.len() });
    }
    let rec = reconstruct(merged, tile_qubits, hw)?;
    if let Some(v) = rec.violations.first() {
        return Ok(Verdict::fails(
            Method::Isolation,
            format!(
                "{} cross-tile CZ pair(s); first at instruction {}: qubit {} with foreign atom {}",
                rec.violations.len(),
                v.instruction,
                v.inside,
                v.outside
            ),
        ));
    }
    equivalent(original, &rec.circuit, oracle_limit)
}
