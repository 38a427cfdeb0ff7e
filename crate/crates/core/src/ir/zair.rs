//! ZAIR instructions and their translation into the NA dialect.

use serde::{Deserialize, Serialize};

use super::{IrError, NAInstruction, Site};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ZairInstruction {
    Init {
        init_locs: Vec<Site>,
    },
    OneQGate {
        /// One `(x, y, z)` angle triple per location, or a single shared one.
        unitary: Vec<(f64, f64, f64)>,
        locs: Vec<Site>,
    },
    Rydberg {
        zone_id: usize,
    },
    Move {
        row_id: Vec<usize>,
        row_y_begin: Vec<f64>,
        row_y_end: Vec<f64>,
        col_id: Vec<usize>,
        col_x_begin: Vec<f64>,
        col_x_end: Vec<f64>,
        zone_id: usize,
    },
}

fn arity(what: &str, a: usize, b: usize) -> Result<(), IrError> {
    if a == b {
        Ok(())
    } else {
        Err(IrError::Arity(format!("{what}: {a} vs {b}")))
    }
}

/// Translates one ZAIR instruction. Moves pair the k-th row coordinate with
/// the k-th column coordinate: source `(col_x_begin[k], row_y_begin[k])`,
/// target `(col_x_end[k], row_y_end[k])`.
pub fn map_zair(instr: &ZairInstruction) -> Result<NAInstruction, IrError> {
    match instr {
        ZairInstruction::Init { init_locs } => {
            Ok(NAInstruction::Init { sites: init_locs.clone(), qubit_ids: (0..init_locs.len()).collect() })
        }
        ZairInstruction::OneQGate { unitary, locs } => {
            let angles = if unitary.len() == 1 {
                vec![unitary[0]; locs.len()]
            } else {
                arity("1qGate unitary/locs", unitary.len(), locs.len())?;
                unitary.clone()
            };
            if locs.is_empty() {
                return Err(IrError::Arity("1qGate without locations".into()));
            }
            Ok(NAInstruction::U3Batch { sites: locs.clone(), angles })
        }
        ZairInstruction::Rydberg { .. } => Ok(NAInstruction::Rydberg),
        ZairInstruction::Move { row_id, row_y_begin, row_y_end, col_id, col_x_begin, col_x_end, .. } => {
            arity("move row_y_begin/row_y_end", row_y_begin.len(), row_y_end.len())?;
            arity("move col_x_begin/col_x_end", col_x_begin.len(), col_x_end.len())?;
            arity("move row_id/row_y_begin", row_id.len(), row_y_begin.len())?;
            arity("move col_id/col_x_begin", col_id.len(), col_x_begin.len())?;
            arity("move rows/columns", row_y_begin.len(), col_x_begin.len())?;
            if row_y_begin.is_empty() {
                return Err(IrError::Arity("move without coordinates".into()));
            }
            let from = col_x_begin.iter().zip(row_y_begin).map(|(&x, &y)| (x, y)).collect();
            let to = col_x_end.iter().zip(row_y_end).map(|(&x, &y)| (x, y)).collect();
            Ok(NAInstruction::Move { from, to })
        }
    }
}
