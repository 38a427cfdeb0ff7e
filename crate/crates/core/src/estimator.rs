//! Instruction durations, per-qubit timelines, fidelity and throughput.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hw::HardwareConfig;
use crate::ir::{AtomState, IrError, NAInstruction, NAProgram, SITE_TOL};
use crate::orchestrator::{InstrTag, MergedSchedule, Phase, TagKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EstimatorError {
    #[error("no circuits to run")]
    EmptyRun,
    #[error(transparent)]
    Replay(#[from] IrError),
}

/// Transport time for a move of `distance_um`: a trapezoidal velocity
/// profile (triangular when the cruise speed is never reached) plus pickup
/// and drop-off transfers.
pub fn move_duration(distance_um: f64, hw: &HardwareConfig) -> f64 {
    let d = distance_um.max(0.0);
    let (v, a) = (hw.move_speed_um_per_us, hw.move_accel_um_per_us2);
    let travel = if d <= 0.0 {
        0.0
    } else if d < v * v / a {
        2.0 * (d / a).sqrt()
    } else {
        d / v + v / a
    };
    travel + 2.0 * hw.t_transfer_us
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct QubitStats {
    pub n1: usize,
    /// CZ participations.
    pub n2: usize,
    pub n_trans: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Span {
    pub start: f64,
    pub end: f64,
    /// Qubit ids occupied (illuminated, moved or entangled) by the instruction.
    pub busy: Vec<usize>,
    /// Tiles the instruction acts on, when the program carries tags.
    pub tiles: Option<Vec<usize>>,
    /// CZ pairs realised by a Rydberg pulse.
    pub cz: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timeline {
    pub wall_us: f64,
    pub spans: Vec<Span>,
    pub qubits: BTreeMap<usize, QubitStats>,
}

fn duration(instr: &NAInstruction, hw: &HardwareConfig) -> f64 {
    match instr {
        NAInstruction::Init { .. } => 0.0,
        NAInstruction::Move { from, to } => {
            let d = from.iter().zip(to).map(|(a, b)| (b.0 - a.0).hypot(b.1 - a.1)).fold(0.0, f64::max);
            move_duration(d, hw)
        }
        NAInstruction::U3Batch { .. } => hw.t_1q_us,
        NAInstruction::Rydberg => hw.t_2q_us,
    }
}

/// Atom pairs a Rydberg pulse entangles: both inside the entanglement zone
/// and within the blockade radius.
pub fn rydberg_pairs(state: &AtomState, hw: &HardwareConfig) -> Vec<(usize, usize)> {
    let inside: Vec<usize> = (0..state.pos.len()).filter(|&k| hw.in_entanglement_zone(state.pos[k].1)).collect();
    let mut out = Vec::new();
    for (x, &i) in inside.iter().enumerate() {
        for &j in &inside[x + 1..] {
            let (p, q) = (state.pos[i], state.pos[j]);
            if (p.0 - q.0).hypot(p.1 - q.1) <= hw.blockade_radius_um + SITE_TOL {
                let (a, b) = (state.ids[i], state.ids[j]);
                out.push((a.min(b), a.max(b)));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Times a program on a single clock. With tags and more than one AOD,
/// consecutive move sub-rounds of one phase run `n_aods` at a time.
pub fn timeline(program: &NAProgram, tags: Option<&[InstrTag]>, hw: &HardwareConfig) -> Result<Timeline, IrError> {
    let mut state = AtomState::default();
    let mut qubits: BTreeMap<usize, QubitStats> = BTreeMap::new();
    let mut spans: Vec<Span> = Vec::with_capacity(program.instructions.len());
    let mut clock = 0.0f64;
    // (layer, phase, members so far, group start) of the open move group
    let mut group: Option<(usize, Phase, usize, f64)> = None;

    for (index, instr) in program.instructions.iter().enumerate() {
        let tag = tags.and_then(|t| t.get(index));
        let atoms = state.apply(index, instr)?;
        let ids: Vec<usize> = atoms.iter().map(|&k| state.ids[k]).collect();
        if let NAInstruction::Init { qubit_ids, .. } = instr {
            for &q in qubit_ids {
                qubits.entry(q).or_default();
            }
        }
        let dur = duration(instr, hw);

        let start = match (instr, tag) {
            (NAInstruction::Move { .. }, Some(t)) if hw.n_aods > 1 => match group {
                Some((l, p, n, s)) if l == t.layer && p == t.phase && n < hw.n_aods => {
                    group = Some((l, p, n + 1, s));
                    s
                }
                _ => {
                    group = Some((t.layer, t.phase, 1, clock));
                    clock
                }
            },
            _ => {
                group = None;
                clock
            }
        };
        let end = start + dur;
        clock = clock.max(end);

        let mut busy = ids.clone();
        let mut cz = Vec::new();
        match instr {
            NAInstruction::Move { .. } => {
                for &q in &ids {
                    qubits.entry(q).or_default().n_trans += 2;
                }
            }
            NAInstruction::U3Batch { angles, .. } => {
                let counted: Vec<usize> = match tag.map(|t| &t.kind) {
                    Some(TagKind::GlobalY { targets }) => targets.clone(),
                    _ => ids
                        .iter()
                        .zip(angles)
                        .filter(|(_, &(t, p, l))| t != 0.0 || p != 0.0 || l != 0.0)
                        .map(|(&q, _)| q)
                        .collect(),
                };
                for q in counted {
                    qubits.entry(q).or_default().n1 += 1;
                }
            }
            NAInstruction::Rydberg => {
                cz = rydberg_pairs(&state, hw);
                for &(a, b) in &cz {
                    qubits.entry(a).or_default().n2 += 1;
                    qubits.entry(b).or_default().n2 += 1;
                    busy.extend([a, b]);
                }
                busy.sort_unstable();
                busy.dedup();
            }
            NAInstruction::Init { .. } => busy.clear(),
        }
        spans.push(Span { start, end, busy, tiles: tag.map(|t| t.tiles.clone()), cz });
    }
    Ok(Timeline { wall_us: clock, spans, qubits })
}

/// `E1^n1 * E2^n2 * Etrans^ntrans * prod_q exp(-t_q / T2)`.
pub fn fidelity(n1: usize, n2: usize, n_trans: usize, idle_us: &[f64], hw: &HardwareConfig) -> f64 {
    let idle: f64 = idle_us.iter().sum();
    hw.fidelity_1q.powi(n1 as i32)
        * hw.fidelity_2q.powi(n2 as i32)
        * hw.fidelity_transfer.powi(n_trans as i32)
        * (-idle / hw.t2_us).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileMetrics {
    pub exec_time_us: f64,
    pub n1: usize,
    /// CZ gates applied to the tile.
    pub n2: usize,
    pub n_trans: usize,
    pub idle_us: Vec<f64>,
    pub fidelity: f64,
}

/// Metrics for the qubits `qubits` of tile `tile`. The tile finishes with
/// the last instruction acting on it; idle time is measured up to there.
pub fn tile_metrics(tl: &Timeline, tile: usize, qubits: &[usize], hw: &HardwareConfig) -> TileMetrics {
    let acts = |s: &Span| match &s.tiles {
        Some(t) => t.contains(&tile) && s.end > s.start,
        None => s.end > s.start && s.busy.iter().any(|q| qubits.contains(q)),
    };
    let exec = tl.spans.iter().filter(|s| acts(s)).map(|s| s.end).fold(0.0, f64::max);
    let mut n1 = 0;
    let mut n_trans = 0;
    let mut idle = Vec::with_capacity(qubits.len());
    for &q in qubits {
        let st = tl.qubits.get(&q).cloned().unwrap_or_default();
        n1 += st.n1;
        n_trans += st.n_trans;
        let busy: f64 =
            tl.spans.iter().filter(|s| s.end <= exec + 1e-9 && s.busy.contains(&q)).map(|s| s.end - s.start).sum();
        idle.push((exec - busy).max(0.0));
    }
    let n2 =
        tl.spans.iter().flat_map(|s| s.cz.iter()).filter(|(a, b)| qubits.contains(a) && qubits.contains(b)).count();
    let fidelity = fidelity(n1, n2, n_trans, &idle, hw);
    TileMetrics { exec_time_us: exec, n1, n2, n_trans, idle_us: idle, fidelity }
}

/// Metrics for every tile of a merged schedule.
pub fn schedule_metrics(
    schedule: &MergedSchedule,
    hw: &HardwareConfig,
) -> Result<(Timeline, Vec<TileMetrics>), IrError> {
    let tl = timeline(&schedule.program, Some(&schedule.tags), hw)?;
    let metrics = (0..schedule.tiles.len())
        .map(|k| {
            let qs: Vec<usize> = schedule.qubits_of(k).collect();
            tile_metrics(&tl, k, &qs, hw)
        })
        .collect();
    Ok((tl, metrics))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Throughput {
    /// Circuits per millisecond.
    pub tau_per_ms: f64,
    pub tau_seq_per_ms: f64,
    pub ratio: f64,
}

/// `tau = sum |B_j| / sum T(B_j)` with `T(B) = t_init + max t(c)`; the
/// sequential baseline runs every circuit alone with its solo time.
/// `bins[j]` lists `(t(c) in bin, solo t(c))` per circuit, in us.
pub fn throughput(bins: &[Vec<(f64, f64)>], hw: &HardwareConfig) -> Result<Throughput, EstimatorError> {
    let n: usize = bins.iter().map(Vec::len).sum();
    if n == 0 {
        return Err(EstimatorError::EmptyRun);
    }
    let t_init = hw.t_init_us();
    let merged: f64 =
        bins.iter().filter(|b| !b.is_empty()).map(|b| t_init + b.iter().map(|c| c.0).fold(0.0, f64::max)).sum();
    let seq: f64 = bins.iter().flatten().map(|c| t_init + c.1).sum();
    let tau = n as f64 / merged * 1e3;
    let tau_seq = n as f64 / seq * 1e3;
    Ok(Throughput { tau_per_ms: tau, tau_seq_per_ms: tau_seq, ratio: tau / tau_seq })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileReport {
    pub label: String,
    pub bin: usize,
    pub anchor_x_um: f64,
    pub exec_time_us: f64,
    pub solo_time_us: f64,
    pub n1: usize,
    pub n2: usize,
    pub n_trans: usize,
    pub idle_us: Vec<f64>,
    pub fidelity: f64,
    pub solo_fidelity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinReport {
    pub index: usize,
    pub tiles: Vec<String>,
    /// `t_init + max t(c)`.
    pub wall_time_us: f64,
    pub rho_s: f64,
    pub rho_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionReport {
    pub tiles: Vec<TileReport>,
    pub bins: Vec<BinReport>,
    pub throughput: Throughput,
}

impl ExecutionReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports serialize")
    }
}
