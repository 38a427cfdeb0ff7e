//! Reference per-tile lowering: seats, entanglement sites and the four-phase
//! layer program.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frontend::{build_dag, Circuit, Gate};
use crate::hw::HardwareConfig;
use crate::ir::{NAInstruction, NAProgram, Site};
use crate::orchestrator::{build_conflict_graph, greedy_mis_rounds};
use crate::placer::MoveOp;
use crate::planner::{split_layers, ExecLayer, LayerKind, VirtualZoneLayout};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BackendError {
    #[error("circuit `{0}` is not in the native U3/CZ basis")]
    NotNative(String),
    #[error("layout for `{name}` seats {capacity} atoms but the circuit has {needed} qubits")]
    Capacity { name: String, capacity: usize, needed: usize },
    #[error("layout for `{0}` has no entanglement site but the circuit entangles")]
    NoSite(String),
}

/// One execution layer of a tile: optional CZ round followed by U3 targets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileLayer {
    pub pairs: Vec<(usize, usize)>,
    /// Where each pair's atoms sit during the Rydberg pulse.
    pub pair_sites: Vec<(Site, Site)>,
    pub moves_in: Vec<MoveOp>,
    pub moves_out: Vec<MoveOp>,
    pub u3: Vec<(usize, (f64, f64, f64))>,
}

impl TileLayer {
    /// Tile-local atom positions at the start of phase 1 and phase 3.
    pub fn positions(&self, seats: &[Site], after_moves_in: bool) -> Vec<Site> {
        let mut pos = seats.to_vec();
        if after_moves_in {
            for (&(a, b), &(sa, sb)) in self.pairs.iter().zip(&self.pair_sites) {
                pos[a] = sa;
                pos[b] = sb;
            }
        }
        pos
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tile {
    pub label: String,
    pub n_qubits: usize,
    pub layout: VirtualZoneLayout,
    pub width_um: f64,
    pub height_um: f64,
    /// Home seat of each qubit, tile-local.
    pub seats: Vec<Site>,
    /// Some seat lies on the tile's right boundary.
    pub right_edge_seat: bool,
    pub layers: Vec<TileLayer>,
    #[serde(with = "program_text")]
    pub program: NAProgram,
    /// Number of CZ rounds.
    pub depth: usize,
    pub est_time_us: f64,
    /// The rebased source circuit.
    pub circuit: Circuit,
}

impl Tile {
    pub fn cz_count(&self) -> usize {
        self.layers.iter().map(|l| l.pairs.len()).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tile serializes")
    }

    pub fn from_json(text: &str) -> Result<Tile, serde_json::Error> {
        serde_json::from_str(text)
    }
}

mod program_text {
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::ir::{emit_na, parse_na, NAProgram};

    pub fn serialize<S: Serializer>(p: &NAProgram, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&emit_na(p))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<NAProgram, D::Error> {
        let text = String::deserialize(d)?;
        parse_na(&text).map_err(serde::de::Error::custom)
    }
}

pub fn seat_of(q: usize, hw: &HardwareConfig) -> Site {
    let r = hw.storage_rows;
    ((q / r) as f64 * hw.storage_spacing_um, hw.storage_row_y(q % r))
}

pub fn site_center(k: usize, hw: &HardwareConfig) -> Site {
    ((k as f64 + 0.5) * hw.entanglement_site_spacing_um, hw.entanglement_row_y())
}

fn batched_moves(moves: &[MoveOp], atoms: &[Site], hw: &HardwareConfig) -> Vec<NAInstruction> {
    let graph = build_conflict_graph(moves, atoms, hw);
    greedy_mis_rounds(&graph)
        .into_iter()
        .map(|round| NAInstruction::Move {
            from: round.iter().map(|&i| moves[i].from).collect(),
            to: round.iter().map(|&i| moves[i].to).collect(),
        })
        .collect()
}

/// Lowers a rebased circuit with the given layout, splitting layers with
/// `window`.
pub fn compile_tile(
    circuit: &Circuit,
    layout: &VirtualZoneLayout,
    hw: &HardwareConfig,
    window: usize,
) -> Result<Tile, BackendError> {
    let layers = split_layers(&build_dag(circuit), window);
    compile_tile_with_layers(circuit, &layers, layout, hw)
}

pub fn compile_tile_with_layers(
    circuit: &Circuit,
    exec: &[ExecLayer],
    layout: &VirtualZoneLayout,
    hw: &HardwareConfig,
) -> Result<Tile, BackendError> {
    if !circuit.is_native() {
        return Err(BackendError::NotNative(circuit.name.clone()));
    }
    let n = circuit.n_qubits;
    let capacity = layout.storage_capacity(hw);
    if capacity < n {
        return Err(BackendError::Capacity { name: circuit.name.clone(), capacity, needed: n });
    }
    let sites = layout.site_capacity(hw);
    if sites == 0 && circuit.cz_count() > 0 {
        return Err(BackendError::NoSite(circuit.name.clone()));
    }
    let seats: Vec<Site> = (0..n).map(|q| seat_of(q, hw)).collect();
    let half_gap = hw.pair_gap_um / 2.0;

    let mut layers: Vec<TileLayer> = Vec::new();
    for layer in exec {
        match layer.kind {
            LayerKind::Multi => {
                let mut pairs: Vec<(usize, usize)> = layer
                    .gates
                    .iter()
                    .map(|&g| match circuit.gates[g] {
                        Gate::Cz(a, b) => (a.min(b), a.max(b)),
                        other => unreachable!("multi layer holds {other:?}"),
                    })
                    .collect();
                pairs.sort_unstable();
                for chunk in pairs.chunks(sites) {
                    let mut tl = TileLayer {
                        pairs: chunk.to_vec(),
                        pair_sites: Vec::new(),
                        moves_in: Vec::new(),
                        moves_out: Vec::new(),
                        u3: Vec::new(),
                    };
                    for (k, &(a, b)) in chunk.iter().enumerate() {
                        let (cx, cy) = site_center(k, hw);
                        let (sa, sb) = ((cx - half_gap, cy), (cx + half_gap, cy));
                        tl.pair_sites.push((sa, sb));
                        for (q, s) in [(a, sa), (b, sb)] {
                            tl.moves_in.push(MoveOp { owner: 0, qubit: q, from: seats[q], to: s });
                            tl.moves_out.push(MoveOp { owner: 0, qubit: q, from: s, to: seats[q] });
                        }
                    }
                    layers.push(tl);
                }
            }
            LayerKind::Single => {
                let u3: Vec<(usize, (f64, f64, f64))> = layer
                    .gates
                    .iter()
                    .map(|&g| match circuit.gates[g] {
                        Gate::U3 { qubit, theta, phi, lambda } => (qubit, (theta, phi, lambda)),
                        other => unreachable!("single layer holds {other:?}"),
                    })
                    .collect();
                match layers.last_mut() {
                    Some(last) if !last.pairs.is_empty() && last.u3.is_empty() => last.u3 = u3,
                    _ => layers.push(TileLayer {
                        pairs: Vec::new(),
                        pair_sites: Vec::new(),
                        moves_in: Vec::new(),
                        moves_out: Vec::new(),
                        u3,
                    }),
                }
            }
        }
    }
    for l in &mut layers {
        l.u3.sort_by_key(|&(q, _)| q);
    }

    let mut instrs = vec![NAInstruction::Init { sites: seats.clone(), qubit_ids: (0..n).collect() }];
    for l in &layers {
        if !l.pairs.is_empty() {
            instrs.extend(batched_moves(&l.moves_in, &seats, hw));
            instrs.push(NAInstruction::Rydberg);
            instrs.extend(batched_moves(&l.moves_out, &l.positions(&seats, true), hw));
        }
        if !l.u3.is_empty() {
            instrs.push(NAInstruction::U3Batch {
                sites: l.u3.iter().map(|&(q, _)| seats[q]).collect(),
                angles: l.u3.iter().map(|&(_, a)| a).collect(),
            });
        }
    }
    let mut program = NAProgram::new(instrs);
    for q in 0..n {
        program.qubit_map.insert(q, circuit.name.clone());
    }

    let w = layout.w_selected;
    let right_edge_seat = seats.iter().any(|s| s.0 >= w - 1e-9);
    let mut tile = Tile {
        label: circuit.name.clone(),
        n_qubits: n,
        layout: layout.clone(),
        width_um: w,
        height_um: layout.height(),
        seats,
        right_edge_seat,
        depth: layers.iter().filter(|l| !l.pairs.is_empty()).count(),
        layers,
        program,
        est_time_us: 0.0,
        circuit: circuit.clone(),
    };
    tile.est_time_us = estimate_tile_time(&tile, hw);
    Ok(tile)
}

/// Wall time of the tile executed alone through the same merge and row
/// lowering used for bins. Initialization is excluded.
pub fn estimate_tile_time(tile: &Tile, hw: &HardwareConfig) -> f64 {
    let merged =
        crate::orchestrator::merge(std::slice::from_ref(tile), &[0.0], hw).expect("a lone tile always schedules");
    crate::estimator::timeline(&merged.program, Some(&merged.tags), hw).expect("merged programs replay").wall_us
}
