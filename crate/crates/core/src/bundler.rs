//! Partitioning tiles into execution bins by simulated annealing over
//! spatial and temporal utilization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::Tile;
use crate::hw::HardwareConfig;
use crate::placer::grid_span;

const TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BundleError {
    #[error("tile `{label}` is {width:.3} um wide; the device holds {device:.3} um")]
    InfeasibleTile { label: String, width: f64, device: f64 },
    #[error("bin is empty")]
    EmptyBin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SAParams {
    pub t0: f64,
    pub gamma: f64,
    pub iterations: usize,
    pub seed: u64,
    /// Spatial weight in the bundling objective.
    pub alpha: f64,
}

impl Default for SAParams {
    fn default() -> Self {
        SAParams { t0: 1.0, gamma: 0.995, iterations: 20_000, seed: 42, alpha: 0.6 }
    }
}

/// What the bundler needs to know about a tile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinItem {
    pub label: String,
    pub width: f64,
    pub time: f64,
    /// A seat sits on the right boundary, so a neighbour needs extra room.
    pub closed: bool,
}

impl From<&Tile> for BinItem {
    fn from(t: &Tile) -> Self {
        BinItem { label: t.label.clone(), width: t.width_um, time: t.est_time_us, closed: t.right_edge_seat }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    /// Indices into the bundled item list, ascending.
    pub tiles: Vec<usize>,
    pub rho_s: f64,
    pub rho_t: f64,
}

/// Used fraction of the device width.
pub fn rho_spatial(items: &[&BinItem], hw: &HardwareConfig) -> Result<f64, BundleError> {
    if items.is_empty() {
        return Err(BundleError::EmptyBin);
    }
    let used: f64 = items.iter().map(|i| i.width).sum();
    Ok((used / hw.width_um).min(1.0))
}

/// Mean tile time over the longest tile time; 1 when all are equal.
pub fn rho_temporal(items: &[&BinItem]) -> Result<f64, BundleError> {
    if items.is_empty() {
        return Err(BundleError::EmptyBin);
    }
    let longest = items.iter().map(|i| i.time).fold(0.0, f64::max);
    if longest <= 0.0 {
        return Ok(1.0);
    }
    let total: f64 = items.iter().map(|i| i.time).sum();
    Ok(total / (items.len() as f64 * longest))
}

/// Whether the items can be laid side by side on the anchor grid: widths sum
/// within the device and the grid-rounded advances, with the most wasteful
/// item placed last, still fit.
pub fn fits(items: &[&BinItem], hw: &HardwareConfig) -> bool {
    let grid = hw.storage_spacing_um;
    let total: f64 = items.iter().map(|i| i.width).sum();
    if total > hw.width_um + TOL {
        return false;
    }
    let spans: Vec<f64> = items.iter().map(|i| grid_span(i.width, i.closed, grid, hw)).collect();
    let slack = items.iter().zip(&spans).map(|(i, s)| s - i.width).fold(0.0, f64::max);
    spans.iter().sum::<f64>() - slack <= hw.width_um + TOL
}

fn bin_score(items: &[BinItem], bin: &[usize], alpha: f64, hw: &HardwareConfig) -> f64 {
    let refs: Vec<&BinItem> = bin.iter().map(|&i| &items[i]).collect();
    let s = rho_spatial(&refs, hw).unwrap_or(0.0);
    let t = rho_temporal(&refs).unwrap_or(0.0);
    alpha * s + (1.0 - alpha) * t
}

/// Bundling objective: mean over bins of alpha*rho_S + (1-alpha)*rho_T.
pub fn objective(items: &[BinItem], bins: &[Vec<usize>], alpha: f64, hw: &HardwareConfig) -> f64 {
    if bins.is_empty() {
        return 0.0;
    }
    bins.iter().map(|b| bin_score(items, b, alpha, hw)).sum::<f64>() / bins.len() as f64
}

fn bin_fits(items: &[BinItem], bin: &[usize], hw: &HardwareConfig) -> bool {
    let refs: Vec<&BinItem> = bin.iter().map(|&i| &items[i]).collect();
    fits(&refs, hw)
}

fn check_items(items: &[BinItem], hw: &HardwareConfig) -> Result<(), BundleError> {
    for it in items {
        if !fits(&[it], hw) {
            return Err(BundleError::InfeasibleTile { label: it.label.clone(), width: it.width, device: hw.width_um });
        }
    }
    Ok(())
}

/// FIFO first-fit: each item goes to the first bin with room.
pub fn first_fit(items: &[BinItem], hw: &HardwareConfig) -> Result<Vec<Vec<usize>>, BundleError> {
    check_items(items, hw)?;
    let mut bins: Vec<Vec<usize>> = Vec::new();
    for i in 0..items.len() {
        let slot = bins.iter().position(|b| {
            let mut trial = b.clone();
            trial.push(i);
            bin_fits(items, &trial, hw)
        });
        match slot {
            Some(k) => bins[k].push(i),
            None => bins.push(vec![i]),
        }
    }
    Ok(bins)
}

fn canonical(mut bins: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    bins.retain(|b| !b.is_empty());
    bins.iter_mut().for_each(|b| b.sort_unstable());
    bins.sort();
    bins
}

fn finish(items: &[BinItem], bins: Vec<Vec<usize>>, hw: &HardwareConfig) -> Vec<Bin> {
    canonical(bins)
        .into_iter()
        .map(|tiles| {
            let refs: Vec<&BinItem> = tiles.iter().map(|&i| &items[i]).collect();
            Bin { rho_s: rho_spatial(&refs, hw).unwrap_or(0.0), rho_t: rho_temporal(&refs).unwrap_or(0.0), tiles }
        })
        .collect()
}

/// Anneals from FIFO first-fit. Each step applies one of: move an item to a
/// new bin, swap items across bins, move an item into another bin. Width
/// infeasible states are rejected; regressions are accepted with probability
/// exp(-dL / (L0 * T)). Returns the best partition seen.
pub fn bundle(items: &[BinItem], params: &SAParams, hw: &HardwareConfig) -> Result<Vec<Bin>, BundleError> {
    let start = first_fit(items, hw)?;
    let alpha = params.alpha;
    let mut cur = start;
    let mut l_cur = objective(items, &cur, alpha, hw);
    let mut best = cur.clone();
    let mut l_best = l_cur;
    let scale = l_cur.abs().max(1e-9);
    let n = items.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut temp = params.t0;

    let locate = |bins: &[Vec<usize>], item: usize| -> (usize, usize) {
        for (b, bin) in bins.iter().enumerate() {
            if let Some(p) = bin.iter().position(|&x| x == item) {
                return (b, p);
            }
        }
        unreachable!("every item lives in a bin")
    };

    for _ in 0..params.iterations {
        if n < 2 {
            break;
        }
        let mut next = cur.clone();
        let ok = match rng.gen_range(0..3) {
            0 => {
                let item = rng.gen_range(0..n);
                let (b, p) = locate(&next, item);
                if next[b].len() == 1 {
                    false
                } else {
                    next[b].remove(p);
                    next.push(vec![item]);
                    true
                }
            }
            1 => {
                let a = rng.gen_range(0..n);
                let c = rng.gen_range(0..n);
                let (ba, pa) = locate(&next, a);
                let (bc, pc) = locate(&next, c);
                if ba == bc {
                    false
                } else {
                    next[ba][pa] = c;
                    next[bc][pc] = a;
                    bin_fits(items, &next[ba], hw) && bin_fits(items, &next[bc], hw)
                }
            }
            _ => {
                let item = rng.gen_range(0..n);
                let (b, p) = locate(&next, item);
                if next.len() < 2 {
                    false
                } else {
                    let mut target = rng.gen_range(0..next.len() - 1);
                    if target >= b {
                        target += 1;
                    }
                    next[b].remove(p);
                    next[target].push(item);
                    let fine = bin_fits(items, &next[target], hw);
                    next.retain(|x| !x.is_empty());
                    fine
                }
            }
        };
        if ok {
            let l_next = objective(items, &next, alpha, hw);
            let delta = l_next - l_cur;
            if delta >= 0.0 || rng.gen::<f64>() < (delta / scale / temp.max(1e-300)).exp() {
                cur = next;
                l_cur = l_next;
                if l_cur > l_best + 1e-12 {
                    best = cur.clone();
                    l_best = l_cur;
                }
            }
        }
        temp *= params.gamma;
    }
    Ok(finish(items, best, hw))
}
