//! The neutral-atom instruction dialect: `@init`, `@move`, `@u3`, `@rydberg`.

mod text;
mod zair;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use text::{emit_na, parse_na};
pub use zair::{map_zair, ZairInstruction};

/// A point in the atom plane, micrometres.
pub type Site = (f64, f64);

/// Coordinate equality tolerance used during replay.
pub const SITE_TOL: f64 = 1e-6;

pub const DIALECT_VERSION: &str = "MULTIQ-NA 1.0";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IrError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("instruction {index}: site ({:.3}, {:.3}) {message}", site.0, site.1)]
    Replay { index: usize, site: Site, message: String },
    #[error("arity mismatch: {0}")]
    Arity(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NAInstruction {
    Init { sites: Vec<Site>, qubit_ids: Vec<usize> },
    Move { from: Vec<Site>, to: Vec<Site> },
    U3Batch { sites: Vec<Site>, angles: Vec<(f64, f64, f64)> },
    Rydberg,
}

impl NAInstruction {
    pub fn kind(&self) -> &'static str {
        match self {
            NAInstruction::Init { .. } => "init",
            NAInstruction::Move { .. } => "move",
            NAInstruction::U3Batch { .. } => "u3",
            NAInstruction::Rydberg => "rydberg",
        }
    }

    /// Arity checks that do not need atom positions.
    pub fn check_arity(&self) -> Result<(), String> {
        match self {
            NAInstruction::Init { sites, qubit_ids } => {
                if sites.len() != qubit_ids.len() {
                    return Err(format!("init has {} sites but {} ids", sites.len(), qubit_ids.len()));
                }
                if let Some((a, b)) = first_coincident(sites) {
                    return Err(format!("init sites {a} and {b} coincide"));
                }
                let mut ids = qubit_ids.clone();
                ids.sort_unstable();
                if ids.windows(2).any(|w| w[0] == w[1]) {
                    return Err("init repeats a qubit id".into());
                }
            }
            NAInstruction::Move { from, to } => {
                if from.len() != to.len() || from.is_empty() {
                    return Err(format!("move pairs {} sources with {} targets", from.len(), to.len()));
                }
                if first_coincident(from).is_some() || first_coincident(to).is_some() {
                    return Err("move sites must be pairwise distinct".into());
                }
            }
            NAInstruction::U3Batch { sites, angles } => {
                if sites.len() != angles.len() || sites.is_empty() {
                    return Err(format!("u3 pairs {} sites with {} angle triples", sites.len(), angles.len()));
                }
            }
            NAInstruction::Rydberg => {}
        }
        Ok(())
    }
}

pub fn same_site(a: Site, b: Site) -> bool {
    (a.0 - b.0).abs() <= SITE_TOL && (a.1 - b.1).abs() <= SITE_TOL
}

fn first_coincident(sites: &[Site]) -> Option<(usize, usize)> {
    for i in 0..sites.len() {
        for j in i + 1..sites.len() {
            if same_site(sites[i], sites[j]) {
                return Some((i, j));
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NAProgram {
    pub header: String,
    pub instructions: Vec<NAInstruction>,
    /// Owning circuit label per qubit id.
    pub qubit_map: BTreeMap<usize, String>,
}

impl Default for NAProgram {
    fn default() -> Self {
        NAProgram { header: DIALECT_VERSION.to_string(), instructions: Vec::new(), qubit_map: BTreeMap::new() }
    }
}

impl NAProgram {
    pub fn new(instructions: Vec<NAInstruction>) -> Self {
        NAProgram { instructions, ..NAProgram::default() }
    }

    pub fn init(&self) -> Option<(&[Site], &[usize])> {
        match self.instructions.first() {
            Some(NAInstruction::Init { sites, qubit_ids }) => Some((sites, qubit_ids)),
            _ => None,
        }
    }

    pub fn count(&self, kind: &str) -> usize {
        self.instructions.iter().filter(|i| i.kind() == kind).count()
    }

    /// Replays the whole stream, checking every positional invariant.
    pub fn validate(&self) -> Result<AtomState, IrError> {
        let mut state = AtomState::default();
        for (index, instr) in self.instructions.iter().enumerate() {
            state.apply(index, instr)?;
        }
        if self.instructions.is_empty() {
            return Err(IrError::Replay { index: 0, site: (0.0, 0.0), message: "program has no init".into() });
        }
        Ok(state)
    }
}

/// Positions of every atom while a program is replayed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AtomState {
    pub ids: Vec<usize>,
    pub pos: Vec<Site>,
    initialized: bool,
}

impl AtomState {
    /// Index of the atom sitting at `site`.
    pub fn find(&self, site: Site) -> Option<usize> {
        self.pos.iter().position(|&p| same_site(p, site))
    }

    pub fn position_of(&self, id: usize) -> Option<Site> {
        self.ids.iter().position(|&q| q == id).map(|k| self.pos[k])
    }

    fn locate(&self, index: usize, site: Site) -> Result<usize, IrError> {
        self.find(site).ok_or_else(|| IrError::Replay { index, site, message: "addresses no atom".into() })
    }

    /// Resolves the atom indices addressed by `sites`.
    pub fn resolve(&self, index: usize, sites: &[Site]) -> Result<Vec<usize>, IrError> {
        sites.iter().map(|&s| self.locate(index, s)).collect()
    }

    /// Applies one instruction. Returns the atom indices it addressed.
    pub fn apply(&mut self, index: usize, instr: &NAInstruction) -> Result<Vec<usize>, IrError> {
        let arity = |message: String| IrError::Replay { index, site: (0.0, 0.0), message };
        instr.check_arity().map_err(arity)?;
        match instr {
            NAInstruction::Init { sites, qubit_ids } => {
                if self.initialized || index != 0 {
                    return Err(arity("init must be the first and only init".into()));
                }
                self.initialized = true;
                self.ids = qubit_ids.clone();
                self.pos = sites.clone();
                Ok((0..sites.len()).collect())
            }
            _ if !self.initialized => Err(arity("instruction precedes init".into())),
            NAInstruction::Move { from, to } => {
                let atoms = self.resolve(index, from)?;
                for &t in to {
                    if let Some(k) = self.find(t) {
                        if !atoms.contains(&k) {
                            return Err(IrError::Replay {
                                index,
                                site: t,
                                message: "is occupied by a parked atom".into(),
                            });
                        }
                    }
                }
                for (&k, &t) in atoms.iter().zip(to) {
                    self.pos[k] = t;
                }
                Ok(atoms)
            }
            NAInstruction::U3Batch { sites, .. } => self.resolve(index, sites),
            NAInstruction::Rydberg => Ok(Vec::new()),
        }
    }
}

/// Position history: the atom state after each instruction.
pub fn replay(program: &NAProgram) -> Result<Vec<AtomState>, IrError> {
    let mut state = AtomState::default();
    let mut out = Vec::with_capacity(program.instructions.len());
    for (index, instr) in program.instructions.iter().enumerate() {
        state.apply(index, instr)?;
        out.push(state.clone());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn init2() -> NAInstruction {
        NAInstruction::Init { sites: vec![(0.0, 0.0), (3.0, 0.0)], qubit_ids: vec![0, 1] }
    }

    #[test]
    fn dangling_move_is_replay_error() {
        let p = NAProgram::new(vec![init2(), NAInstruction::Move { from: vec![(5.0, 5.0)], to: vec![(9.0, 9.0)] }]);
        assert!(matches!(p.validate(), Err(IrError::Replay { index: 1, .. })));
    }

    #[test]
    fn landing_on_parked_atom_fails() {
        let p = NAProgram::new(vec![init2(), NAInstruction::Move { from: vec![(0.0, 0.0)], to: vec![(3.0, 0.0)] }]);
        assert!(p.validate().is_err());
        let swap = NAInstruction::Move { from: vec![(0.0, 0.0), (3.0, 0.0)], to: vec![(3.0, 0.0), (0.0, 0.0)] };
        let s = NAProgram::new(vec![init2(), swap]).validate().unwrap();
        assert_eq!(s.position_of(0), Some((3.0, 0.0)));
    }

    #[test]
    fn init_must_lead() {
        let p = NAProgram::new(vec![NAInstruction::Rydberg, init2()]);
        assert!(p.validate().is_err());
        let p = NAProgram::new(vec![init2(), init2()]);
        assert!(p.validate().is_err());
    }

    #[test]
    fn tolerance_matches_near_sites() {
        let p = NAProgram::new(vec![
            init2(),
            NAInstruction::U3Batch { sites: vec![(3.0000004, -0.0000004)], angles: vec![(1.0, 0.0, 0.0)] },
        ]);
        assert!(p.validate().is_ok());
    }
}
