//! Merges placed tiles into one program: pooled movement sub-rounds, fused
//! Rydberg pulses and row-wise single-qubit lowering.

mod mis;

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::Tile;
use crate::hw::HardwareConfig;
use crate::ir::{NAInstruction, NAProgram, Site, SITE_TOL};
use crate::linalg::is_zero_angle;
use crate::placer::{batch_compatible, MoveOp, Violation};

pub use mis::{build_conflict_graph, greedy_mis_rounds, ConflictGraph};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrchestratorError {
    #[error("layer {layer} {phase:?} sub-round {sub_round} violates AOD constraints: {violation:?}")]
    Schedule { layer: usize, phase: Phase, sub_round: usize, violation: Violation },
    #[error("qubit {0} belongs to no tile")]
    UnknownQubit(usize),
    #[error("{tiles} tiles but {anchors} anchors")]
    Arity { tiles: usize, anchors: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Phase {
    Init,
    MoveIn,
    Rydberg,
    MoveOut,
    SingleQubit,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum TagKind {
    Init,
    Move,
    Rydberg,
    /// Row-targeted Z rotation batch.
    RowZ,
    /// Global Y pulse; `targets` are the atoms the sequence is meant to rotate.
    GlobalY {
        targets: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstrTag {
    pub layer: usize,
    pub phase: Phase,
    pub sub_round: usize,
    /// Tiles with an atom addressed by the instruction.
    pub tiles: Vec<usize>,
    pub kind: TagKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileSlot {
    pub label: String,
    pub qubit_offset: usize,
    pub n_qubits: usize,
    pub anchor_x: f64,
}

impl TileSlot {
    pub fn owns(&self, id: usize) -> bool {
        id >= self.qubit_offset && id < self.qubit_offset + self.n_qubits
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergedSchedule {
    pub program: NAProgram,
    pub tags: Vec<InstrTag>,
    pub tiles: Vec<TileSlot>,
}

impl MergedSchedule {
    /// Global qubit ids owned by tile `k`.
    pub fn qubits_of(&self, k: usize) -> std::ops::Range<usize> {
        let s = &self.tiles[k];
        s.qubit_offset..s.qubit_offset + s.n_qubits
    }

    pub fn tile_of(&self, id: usize) -> Option<usize> {
        self.tiles.iter().position(|s| s.owns(id))
    }
}

fn owners(ids: impl IntoIterator<Item = usize>, slots: &[TileSlot]) -> Vec<usize> {
    let mut t: Vec<usize> = ids.into_iter().filter_map(|id| slots.iter().position(|s| s.owns(id))).collect();
    t.sort_unstable();
    t.dedup();
    t
}

struct Emitter<'a> {
    hw: &'a HardwareConfig,
    slots: &'a [TileSlot],
    pos: Vec<Site>,
    instrs: Vec<NAInstruction>,
    tags: Vec<InstrTag>,
}

impl Emitter<'_> {
    fn push(&mut self, instr: NAInstruction, tag: InstrTag) {
        self.instrs.push(instr);
        self.tags.push(tag);
    }

    /// Pooled moves of one phase, split into greedy-MIS sub-rounds.
    fn moves(&mut self, layer: usize, phase: Phase, moves: &[MoveOp]) -> Result<(), OrchestratorError> {
        if moves.is_empty() {
            return Ok(());
        }
        let graph = build_conflict_graph(moves, &self.pos, self.hw);
        for (sub_round, round) in greedy_mis_rounds(&graph).into_iter().enumerate() {
            let batch: Vec<MoveOp> = round.iter().map(|&i| moves[i]).collect();
            batch_compatible(&batch, &self.pos, self.hw).map_err(|violation| OrchestratorError::Schedule {
                layer,
                phase,
                sub_round,
                violation,
            })?;
            for m in &batch {
                self.pos[m.qubit] = m.to;
            }
            let tiles = owners(batch.iter().map(|m| m.qubit), self.slots);
            self.push(
                NAInstruction::Move {
                    from: batch.iter().map(|m| m.from).collect(),
                    to: batch.iter().map(|m| m.to).collect(),
                },
                InstrTag { layer, phase, sub_round, tiles, kind: TagKind::Move },
            );
        }
        Ok(())
    }
}

/// Merges tiles anchored at `anchors` (x offsets, um) into one schedule.
///
/// Global qubit ids are assigned tile by tile in input order. Layer k of the
/// merged stream pools layer k of every tile.
pub fn merge(tiles: &[Tile], anchors: &[f64], hw: &HardwareConfig) -> Result<MergedSchedule, OrchestratorError> {
    if tiles.len() != anchors.len() {
        return Err(OrchestratorError::Arity { tiles: tiles.len(), anchors: anchors.len() });
    }
    let mut slots = Vec::with_capacity(tiles.len());
    let mut offset = 0;
    for (t, &x) in tiles.iter().zip(anchors) {
        slots.push(TileSlot { label: t.label.clone(), qubit_offset: offset, n_qubits: t.n_qubits, anchor_x: x });
        offset += t.n_qubits;
    }
    let seats: Vec<Site> =
        tiles.iter().zip(anchors).flat_map(|(t, &x)| t.seats.iter().map(move |&(sx, sy)| (sx + x, sy))).collect();

    let mut em = Emitter { hw, slots: &slots, pos: seats.clone(), instrs: Vec::new(), tags: Vec::new() };
    em.push(
        NAInstruction::Init { sites: seats.clone(), qubit_ids: (0..offset).collect() },
        InstrTag { layer: 0, phase: Phase::Init, sub_round: 0, tiles: (0..tiles.len()).collect(), kind: TagKind::Init },
    );

    let depth = tiles.iter().map(|t| t.layers.len()).max().unwrap_or(0);
    for k in 0..depth {
        let present: Vec<(usize, &crate::backend::TileLayer)> =
            tiles.iter().enumerate().filter_map(|(i, t)| t.layers.get(k).map(|l| (i, l))).collect();
        let globalize = |i: usize, m: &MoveOp| MoveOp {
            owner: i,
            qubit: slots[i].qubit_offset + m.qubit,
            ..m.translated(slots[i].anchor_x, 0.0)
        };

        let moves_in: Vec<MoveOp> =
            present.iter().flat_map(|&(i, l)| l.moves_in.iter().map(move |m| globalize(i, m))).collect();
        em.moves(k, Phase::MoveIn, &moves_in)?;

        let firing: Vec<usize> = present.iter().filter(|(_, l)| !l.pairs.is_empty()).map(|&(i, _)| i).collect();
        if !firing.is_empty() {
            em.push(
                NAInstruction::Rydberg,
                InstrTag { layer: k, phase: Phase::Rydberg, sub_round: 0, tiles: firing, kind: TagKind::Rydberg },
            );
        }

        let moves_out: Vec<MoveOp> =
            present.iter().flat_map(|&(i, l)| l.moves_out.iter().map(move |m| globalize(i, m))).collect();
        em.moves(k, Phase::MoveOut, &moves_out)?;

        let assignments: Vec<Assignment> = present
            .iter()
            .flat_map(|&(i, l)| {
                let slots = &slots;
                let pos = &em.pos;
                l.u3.iter().map(move |&(q, a)| {
                    let id = slots[i].qubit_offset + q;
                    (id, pos[id], a)
                })
            })
            .collect();
        let atoms: Vec<(usize, Site)> = em.pos.iter().copied().enumerate().collect();
        for (sub_round, (instr, kind)) in lower_u3_rows(&assignments, &atoms).into_iter().enumerate() {
            let tiles = match (&instr, &kind) {
                (_, TagKind::GlobalY { targets }) => owners(targets.iter().copied(), &slots),
                (NAInstruction::U3Batch { sites, .. }, _) => owners(
                    sites
                        .iter()
                        .filter_map(|&s| atoms.iter().find(|(_, p)| crate::ir::same_site(*p, s)).map(|&(id, _)| id)),
                    &slots,
                ),
                _ => Vec::new(),
            };
            em.push(instr, InstrTag { layer: k, phase: Phase::SingleQubit, sub_round, tiles, kind });
        }
    }

    let mut program = NAProgram::new(em.instrs);
    for s in &slots {
        for id in s.qubit_offset..s.qubit_offset + s.n_qubits {
            program.qubit_map.insert(id, s.label.clone());
        }
    }
    Ok(MergedSchedule { program, tags: em.tags, tiles: slots })
}

const ZERO_TOL: f64 = 1e-12;

/// Qubit id, current site and target U3 angles.
pub type Assignment = (usize, Site, (f64, f64, f64));

/// Row-optimized single-qubit sequence.
///
/// Each target U3(theta, phi, lambda) is realised as
/// RZ(phi + pi/2) RX(theta) RZ(lambda - pi/2), with RX(b) obtained as
/// RY(pi/2) RZ(b) RY(-pi/2). Emission order: row-wise RZ(lambda - pi/2),
/// global RY(-pi/2), row-wise RZ(theta), global RY(pi/2), row-wise
/// RZ(phi + pi/2). RZ(x) is emitted as U3(0, 0, x); global pulses address
/// every atom in `atoms`.
pub fn lower_u3_rows(assignments: &[Assignment], atoms: &[(usize, Site)]) -> Vec<(NAInstruction, TagKind)> {
    if assignments.is_empty() {
        return Vec::new();
    }
    let mut sorted: Vec<&Assignment> = assignments.iter().collect();
    sorted.sort_by(|a, b| a.1 .1.total_cmp(&b.1 .1).then(a.1 .0.total_cmp(&b.1 .0)));
    let mut rows: Vec<Vec<&Assignment>> = Vec::new();
    for a in sorted {
        match rows.last_mut() {
            Some(r) if (r[0].1 .1 - a.1 .1).abs() <= SITE_TOL => r.push(a),
            _ => rows.push(vec![a]),
        }
    }

    let mut out = Vec::new();
    let row_z = |out: &mut Vec<(NAInstruction, TagKind)>, angle: &dyn Fn(&(f64, f64, f64)) -> f64| {
        for row in &rows {
            let (sites, angles): (Vec<Site>, Vec<(f64, f64, f64)>) = row
                .iter()
                .map(|&&(_, s, a)| (s, angle(&a)))
                .filter(|&(_, x)| !is_zero_angle(x, ZERO_TOL))
                .map(|(s, x)| (s, (0.0, 0.0, x)))
                .unzip();
            if !sites.is_empty() {
                out.push((NAInstruction::U3Batch { sites, angles }, TagKind::RowZ));
            }
        }
    };
    let mut targets: Vec<usize> = assignments.iter().map(|a| a.0).collect();
    targets.sort_unstable();
    let global = |theta: f64| {
        (
            NAInstruction::U3Batch {
                sites: atoms.iter().map(|a| a.1).collect(),
                angles: vec![(theta, 0.0, 0.0); atoms.len()],
            },
            TagKind::GlobalY { targets: targets.clone() },
        )
    };

    row_z(&mut out, &|&(_, _, l)| l - FRAC_PI_2);
    out.push(global(-FRAC_PI_2));
    row_z(&mut out, &|&(t, _, _)| t);
    out.push(global(FRAC_PI_2));
    row_z(&mut out, &|&(_, p, _)| p + FRAC_PI_2);
    out
}

/// Splits global measurement outcomes per tile, re-indexed to local qubits.
pub fn route_results(
    schedule: &MergedSchedule,
    outcomes: &BTreeMap<usize, u8>,
) -> Result<Vec<BTreeMap<usize, u8>>, OrchestratorError> {
    let mut out = vec![BTreeMap::new(); schedule.tiles.len()];
    for (&id, &v) in outcomes {
        let k = schedule.tile_of(id).ok_or(OrchestratorError::UnknownQubit(id))?;
        out[k].insert(id - schedule.tiles[k].qubit_offset, v);
    }
    for (k, slot) in schedule.tiles.iter().enumerate() {
        if let Some(q) = (0..slot.n_qubits).find(|q| !out[k].contains_key(q)) {
            return Err(OrchestratorError::UnknownQubit(slot.qubit_offset + q));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::compile_tile;
    use crate::frontend::{rebase_to_native, Circuit, Gate};
    use crate::hw::default_hardware;
    use crate::linalg::{u3_matrix, Mat2};
    use crate::planner::plan_layout;

    fn tile(c: Circuit) -> Tile {
        let hw = default_hardware();
        let c = rebase_to_native(&c);
        let l = plan_layout(&c, 0.4, &hw, 4).unwrap();
        compile_tile(&c, &l, &hw, 4).unwrap()
    }

    /// Composite 2x2 unitary applied to the atom at `site` by a lowered list.
    fn composite(seq: &[(NAInstruction, TagKind)], site: Site) -> Mat2 {
        let mut m = Mat2::identity();
        for (instr, _) in seq {
            if let NAInstruction::U3Batch { sites, angles } = instr {
                for (s, a) in sites.iter().zip(angles) {
                    if crate::ir::same_site(*s, site) {
                        m = u3_matrix(a.0, a.1, a.2) * m;
                    }
                }
            }
        }
        m
    }

    #[test]
    fn pauli_x_row_sequence() {
        let atoms = vec![(0, (0.0, 25.0)), (1, (3.0, 25.0))];
        let seq = lower_u3_rows(&[(0, (0.0, 25.0), (std::f64::consts::PI, 0.0, std::f64::consts::PI))], &atoms);
        let x = u3_matrix(std::f64::consts::PI, 0.0, std::f64::consts::PI);
        assert!(composite(&seq, (0.0, 25.0)).phase_insensitive_diff(&x) < 1e-9);
        assert!(composite(&seq, (3.0, 25.0)).phase_insensitive_diff(&Mat2::identity()) < 1e-9);
    }

    #[test]
    fn zero_angles_still_pulse_and_net_identity() {
        let atoms = vec![(0, (0.0, 25.0))];
        let seq = lower_u3_rows(&[(0, (0.0, 25.0), (0.0, 0.0, 0.0))], &atoms);
        assert!(seq.len() >= 2);
        assert!(composite(&seq, (0.0, 25.0)).phase_insensitive_diff(&Mat2::identity()) < 1e-9);
    }

    #[test]
    fn rows_serialize_per_step() {
        let atoms = vec![(0, (0.0, 25.0)), (1, (0.0, 28.0))];
        let a = (0.3, 0.2, 0.1);
        let seq = lower_u3_rows(&[(0, (0.0, 25.0), a), (1, (0.0, 28.0), a)], &atoms);
        let row_z = seq.iter().filter(|(_, k)| *k == TagKind::RowZ).count();
        assert_eq!(row_z, 6);
        assert_eq!(seq.iter().filter(|(_, k)| matches!(k, TagKind::GlobalY { .. })).count(), 2);
    }

    #[test]
    fn lone_tile_merge_matches_tile_shape() {
        let hw = default_hardware();
        let t = tile(Circuit::with_gates("bell", 2, vec![Gate::H(0), Gate::Cx(0, 1)]));
        let m = merge(std::slice::from_ref(&t), &[12.0], &hw).unwrap();
        assert_eq!(m.program.count("rydberg"), t.program.count("rydberg"));
        assert_eq!(m.program.count("move"), t.program.count("move"));
        assert!(m.program.validate().is_ok());
        let (sites, _) = m.program.init().unwrap();
        assert_eq!(sites[0].0, t.seats[0].0 + 12.0);
    }

    #[test]
    fn rydberg_pulses_are_fused() {
        let hw = default_hardware();
        let a = tile(Circuit::with_gates("a", 2, vec![Gate::Cz(0, 1), Gate::Cz(0, 1)]));
        let b = tile(Circuit::with_gates("b", 2, vec![Gate::Cz(0, 1)]));
        let m = merge(&[a.clone(), b], &[0.0, 30.0], &hw).unwrap();
        assert_eq!(m.program.count("rydberg"), 2);
        assert!(m.program.validate().is_ok());
    }

    #[test]
    fn routing() {
        let hw = default_hardware();
        let a = tile(Circuit::with_gates("a", 2, vec![Gate::Cz(0, 1)]));
        let b = tile(Circuit::with_gates("b", 2, vec![Gate::Cz(0, 1)]));
        let m = merge(&[a, b], &[0.0, 30.0], &hw).unwrap();
        let all: BTreeMap<usize, u8> = (0..4).map(|q| (q, q as u8)).collect();
        let r = route_results(&m, &all).unwrap();
        assert_eq!(r[1], BTreeMap::from([(0, 2), (1, 3)]));
        let mut extra = all.clone();
        extra.insert(9, 1);
        assert_eq!(route_results(&m, &extra), Err(OrchestratorError::UnknownQubit(9)));
        let mut missing = all;
        missing.remove(&1);
        assert_eq!(route_results(&m, &missing), Err(OrchestratorError::UnknownQubit(1)));
    }
}
