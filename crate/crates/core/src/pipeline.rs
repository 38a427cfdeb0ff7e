//! End-to-end driver: compile, bundle, place, merge, estimate and check.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::{compile_tile, BackendError, Tile};
use crate::bundler::{bundle, rho_spatial, rho_temporal, BinItem, BundleError, SAParams};
use crate::checker::{check, CheckError, Verdict, DEFAULT_ORACLE_LIMIT};
use crate::estimator::{
    schedule_metrics, throughput, BinReport, EstimatorError, ExecutionReport, TileMetrics, TileReport,
};
use crate::frontend::{rebase_to_native, Circuit};
use crate::hw::HardwareConfig;
use crate::ir::IrError;
use crate::orchestrator::{merge, MergedSchedule, OrchestratorError};
use crate::placer::{place, Placement, PlacerParams};
use crate::planner::{plan_layout, LayoutError, DEFAULT_WINDOW};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{name}: {source}")]
    Layout { name: String, source: LayoutError },
    #[error("{name}: {source}")]
    Backend { name: String, source: BackendError },
    #[error(transparent)]
    Bundle(#[from] BundleError),
    #[error(transparent)]
    Orchestrator(#[from] OrchestratorError),
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
    #[error("{name}: {source}")]
    Check { name: String, source: CheckError },
    #[error("no circuits to run")]
    Empty,
}

impl From<IrError> for PipelineError {
    fn from(e: IrError) -> Self {
        PipelineError::Estimator(EstimatorError::Replay(e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub p_w: f64,
    pub window: usize,
    pub bundler: SAParams,
    pub placer: PlacerParams,
    pub oracle_limit: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            p_w: 0.4,
            window: DEFAULT_WINDOW,
            bundler: SAParams::default(),
            placer: PlacerParams::default(),
            oracle_limit: DEFAULT_ORACLE_LIMIT,
        }
    }
}

/// Rebases, plans and compiles one circuit. The tile takes the circuit name
/// as its label.
pub fn compile_circuit(circuit: &Circuit, p_w: f64, window: usize, hw: &HardwareConfig) -> Result<Tile, PipelineError> {
    let native = rebase_to_native(circuit);
    let name = circuit.name.clone();
    let layout =
        plan_layout(&native, p_w, hw, window).map_err(|source| PipelineError::Layout { name: name.clone(), source })?;
    compile_tile(&native, &layout, hw, window).map_err(|source| PipelineError::Backend { name, source })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinRun {
    /// Indices into `RunOutput::tiles`, in merge order.
    pub tiles: Vec<usize>,
    pub placement: Placement,
    pub schedule: MergedSchedule,
    pub metrics: Vec<TileMetrics>,
    pub rho_s: f64,
    pub rho_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TileVerdict {
    pub label: String,
    pub bin: usize,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub tiles: Vec<Tile>,
    pub solo: Vec<TileMetrics>,
    pub bins: Vec<BinRun>,
    pub report: ExecutionReport,
    pub verdicts: Vec<TileVerdict>,
}

impl RunOutput {
    pub fn all_equivalent(&self) -> bool {
        self.verdicts.iter().all(|v| v.verdict.equivalent)
    }
}

/// Metrics of a tile run alone, through the same merge and lowering.
pub fn solo_metrics(tile: &Tile, hw: &HardwareConfig) -> Result<TileMetrics, PipelineError> {
    let s = merge(std::slice::from_ref(tile), &[0.0], hw)?;
    let (_, m) = schedule_metrics(&s, hw)?;
    Ok(m.into_iter().next().expect("one tile"))
}

/// Bundles and places `tiles`. Tiles the placer cannot fit are bundled
/// again with the other leftovers until everything is placed.
pub fn bundle_and_place(
    tiles: &[Tile],
    config: &RunConfig,
    hw: &HardwareConfig,
) -> Result<Vec<(Vec<usize>, Placement)>, PipelineError> {
    let mut pending: Vec<usize> = (0..tiles.len()).collect();
    let mut out = Vec::new();
    while !pending.is_empty() {
        let items: Vec<BinItem> = pending.iter().map(|&i| BinItem::from(&tiles[i])).collect();
        let bins = bundle(&items, &config.bundler, hw)?;
        let mut leftover = Vec::new();
        for b in bins {
            let members: Vec<usize> = b.tiles.iter().map(|&k| pending[k]).collect();
            let group: Vec<Tile> = members.iter().map(|&i| tiles[i].clone()).collect();
            let p = place(&group, hw, &config.placer);
            let placed: Vec<usize> = (0..members.len()).filter(|&k| p.placed[k]).collect();
            if placed.len() == members.len() {
                out.push((members, p));
                continue;
            }
            log::info!("re-bundling {} tile(s) the placer could not fit", members.len() - placed.len());
            leftover.extend((0..members.len()).filter(|&k| !p.placed[k]).map(|k| members[k]));
            let kept: Vec<usize> = placed.iter().map(|&k| members[k]).collect();
            if !kept.is_empty() {
                let kept_tiles: Vec<Tile> = kept.iter().map(|&i| tiles[i].clone()).collect();
                out.push((kept, place(&kept_tiles, hw, &config.placer)));
            }
        }
        if leftover.len() == pending.len() {
            // no progress: fall back to one tile per bin
            for i in leftover.drain(..) {
                out.push((vec![i], place(std::slice::from_ref(&tiles[i]), hw, &config.placer)));
            }
        }
        pending = leftover;
    }
    out.sort_by_key(|(m, _)| m[0]);
    Ok(out)
}

/// Runs the whole pipeline on `circuits`.
pub fn run(circuits: &[Circuit], config: &RunConfig, hw: &HardwareConfig) -> Result<RunOutput, PipelineError> {
    if circuits.is_empty() {
        return Err(PipelineError::Empty);
    }
    let tiles: Vec<Tile> =
        circuits.par_iter().map(|c| compile_circuit(c, config.p_w, config.window, hw)).collect::<Result<_, _>>()?;
    let solo: Vec<TileMetrics> = tiles.par_iter().map(|t| solo_metrics(t, hw)).collect::<Result<_, _>>()?;
    let groups = bundle_and_place(&tiles, config, hw)?;

    let bins: Vec<BinRun> = groups
        .into_par_iter()
        .map(|(members, placement)| -> Result<BinRun, PipelineError> {
            let group: Vec<Tile> = members.iter().map(|&i| tiles[i].clone()).collect();
            let schedule = merge(&group, &placement.anchors, hw)?;
            let (_, metrics) = schedule_metrics(&schedule, hw)?;
            let items: Vec<BinItem> = group.iter().map(BinItem::from).collect();
            let refs: Vec<&BinItem> = items.iter().collect();
            Ok(BinRun {
                rho_s: rho_spatial(&refs, hw)?,
                rho_t: rho_temporal(&refs)?,
                tiles: members,
                placement,
                schedule,
                metrics,
            })
        })
        .collect::<Result<_, _>>()?;

    let jobs: Vec<(usize, usize)> =
        bins.iter().enumerate().flat_map(|(b, bin)| (0..bin.tiles.len()).map(move |k| (b, k))).collect();
    let verdicts: Vec<TileVerdict> = jobs
        .par_iter()
        .map(|&(b, k)| {
            let bin = &bins[b];
            let tile = &tiles[bin.tiles[k]];
            let qubits: Vec<usize> = bin.schedule.qubits_of(k).collect();
            check(&tile.circuit, &bin.schedule.program, &qubits, hw, config.oracle_limit)
                .map(|verdict| TileVerdict { label: tile.label.clone(), bin: b, verdict })
                .map_err(|source| PipelineError::Check { name: tile.label.clone(), source })
        })
        .collect::<Result<_, _>>()?;

    let report = build_report(&tiles, &solo, &bins, hw)?;
    Ok(RunOutput { tiles, solo, bins, report, verdicts })
}

fn build_report(
    tiles: &[Tile],
    solo: &[TileMetrics],
    bins: &[BinRun],
    hw: &HardwareConfig,
) -> Result<ExecutionReport, PipelineError> {
    let mut tile_reports = Vec::new();
    let mut bin_reports = Vec::new();
    let mut timing = Vec::new();
    for (b, bin) in bins.iter().enumerate() {
        let mut t = Vec::new();
        for (k, &i) in bin.tiles.iter().enumerate() {
            let m = &bin.metrics[k];
            tile_reports.push(TileReport {
                label: tiles[i].label.clone(),
                bin: b,
                anchor_x_um: bin.placement.anchors[k],
                exec_time_us: m.exec_time_us,
                solo_time_us: solo[i].exec_time_us,
                n1: m.n1,
                n2: m.n2,
                n_trans: m.n_trans,
                idle_us: m.idle_us.clone(),
                fidelity: m.fidelity,
                solo_fidelity: solo[i].fidelity,
            });
            t.push((m.exec_time_us, solo[i].exec_time_us));
        }
        let longest = t.iter().map(|x| x.0).fold(0.0, f64::max);
        bin_reports.push(BinReport {
            index: b,
            tiles: bin.tiles.iter().map(|&i| tiles[i].label.clone()).collect(),
            wall_time_us: hw.t_init_us() + longest,
            rho_s: bin.rho_s,
            rho_t: bin.rho_t,
        });
        timing.push(t);
    }
    Ok(ExecutionReport { tiles: tile_reports, bins: bin_reports, throughput: throughput(&timing, hw)? })
}
