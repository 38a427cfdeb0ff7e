//! AOD compatibility, pairwise tile conflict cost and annealed tile placement.

mod compat;

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::backend::Tile;
use crate::bundler::SAParams;
use crate::hw::HardwareConfig;
use crate::ir::Site;

pub use compat::{batch_compatible, pair_compatible, Axis, MoveOp, Violation};

const TOL: f64 = 1e-6;

/// Geometry a placer needs from a tile.
pub trait Footprint {
    fn width(&self) -> f64;
    /// Some atom seat lies on the right boundary.
    fn closed_right(&self) -> bool;
}

impl Footprint for Tile {
    fn width(&self) -> f64 {
        self.width_um
    }
    fn closed_right(&self) -> bool {
        self.right_edge_seat
    }
}

/// Minimum distance from a tile's anchor to the anchor of a tile on its right.
pub fn min_offset(width: f64, closed: bool, hw: &HardwareConfig) -> f64 {
    if closed {
        width + hw.pair_gap_um
    } else {
        width
    }
}

/// Grid-rounded advance occupied by a tile that has a neighbour to its right.
pub fn grid_span(width: f64, closed: bool, grid: f64, hw: &HardwareConfig) -> f64 {
    (min_offset(width, closed, hw) / grid - 1e-9).ceil().max(0.0) * grid
}

fn shared_layer_cost(
    a: &Tile,
    b: &Tile,
    xa: f64,
    xb: f64,
    count: &mut dyn FnMut(&MoveOp, &MoveOp, &[Site]) -> bool,
) -> usize {
    let mut total = 0;
    for (la, lb) in a.layers.iter().zip(&b.layers) {
        for phase_out in [false, true] {
            let (ma, mb) = if phase_out { (&la.moves_out, &lb.moves_out) } else { (&la.moves_in, &lb.moves_in) };
            if ma.is_empty() || mb.is_empty() {
                continue;
            }
            let atoms: Vec<Site> = la
                .positions(&a.seats, phase_out)
                .into_iter()
                .map(|(x, y)| (x + xa, y))
                .chain(lb.positions(&b.seats, phase_out).into_iter().map(|(x, y)| (x + xb, y)))
                .collect();
            for m in ma {
                let m = m.translated(xa, 0.0);
                for n in mb {
                    if count(&m, &n.translated(xb, 0.0), &atoms) {
                        total += 1;
                    }
                }
            }
        }
    }
    total
}

/// Number of co-timed move pairs (one per tile, same layer index and phase)
/// that cannot share an AOD batch once both tiles are anchored.
pub fn conflict_cost(a: &Tile, b: &Tile, xa: f64, xb: f64, hw: &HardwareConfig) -> usize {
    shared_layer_cost(a, b, xa, xb, &mut |m, n, atoms| !pair_compatible(m, n, atoms, hw))
}

/// Largest possible conflict count between two tiles: every co-timed pair.
pub fn conflict_upper_bound(a: &Tile, b: &Tile) -> usize {
    a.layers
        .iter()
        .zip(&b.layers)
        .map(|(la, lb)| la.moves_in.len() * lb.moves_in.len() + la.moves_out.len() * lb.moves_out.len())
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacerParams {
    pub alpha: f64,
    /// Placement reward; `None` picks 2 * max_i sum_j UB(i, j), at least 1.
    pub beta: Option<f64>,
    /// Per-tile priorities; `None` means 1 for every tile.
    pub priorities: Option<Vec<f64>>,
    /// Anchor granularity; `None` uses the storage pitch.
    pub grid_um: Option<f64>,
    pub sa: SAParams,
}

impl Default for PlacerParams {
    fn default() -> Self {
        PlacerParams { alpha: 1.0, beta: None, priorities: None, grid_um: None, sa: SAParams::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Placement {
    /// Anchor x per tile (um); meaningful only when placed.
    pub anchors: Vec<f64>,
    pub placed: Vec<bool>,
    pub conflicts: usize,
    pub cost: f64,
}

impl Placement {
    pub fn unplaced(&self) -> Vec<usize> {
        (0..self.placed.len()).filter(|&i| !self.placed[i]).collect()
    }
}

/// Cost model shared by the annealer and exhaustive search.
pub struct PlacementProblem<'a> {
    tiles: &'a [Tile],
    hw: &'a HardwareConfig,
    pub grid: f64,
    pub slots: usize,
    pub alpha: f64,
    pub beta: f64,
    pub priorities: Vec<f64>,
    cache: HashMap<(usize, usize, i64), usize>,
}

impl<'a> PlacementProblem<'a> {
    pub fn new(tiles: &'a [Tile], hw: &'a HardwareConfig, params: &PlacerParams) -> Self {
        let grid = params.grid_um.unwrap_or(hw.storage_spacing_um);
        let slots = (hw.width_um / grid + 1e-9).floor() as usize + 1;
        let beta = params.beta.unwrap_or_else(|| {
            let worst = (0..tiles.len())
                .map(|i| {
                    (0..tiles.len())
                        .filter(|&j| j != i)
                        .map(|j| conflict_upper_bound(&tiles[i], &tiles[j]))
                        .sum::<usize>()
                })
                .max()
                .unwrap_or(0);
            (2.0 * params.alpha * worst as f64).max(1.0)
        });
        let priorities = params.priorities.clone().unwrap_or_else(|| vec![1.0; tiles.len()]);
        PlacementProblem { tiles, hw, grid, slots, alpha: params.alpha, beta, priorities, cache: HashMap::new() }
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    fn x(&self, slot: usize) -> f64 {
        slot as f64 * self.grid
    }

    /// Conflicts between tiles i and j at the given slots, cached by offset.
    pub fn pair_cost(&mut self, i: usize, si: usize, j: usize, sj: usize) -> usize {
        let (i, si, j, sj) = if i < j { (i, si, j, sj) } else { (j, sj, i, si) };
        let key = (i, j, sj as i64 - si as i64);
        if let Some(&c) = self.cache.get(&key) {
            return c;
        }
        let c = conflict_cost(&self.tiles[i], &self.tiles[j], self.x(si), self.x(sj), self.hw);
        self.cache.insert(key, c);
        c
    }

    /// Whether the placed tiles fit and keep their mutual distances.
    pub fn feasible(&self, slots: &[Option<usize>]) -> bool {
        let mut placed: Vec<(usize, usize)> = slots.iter().enumerate().filter_map(|(i, s)| s.map(|s| (s, i))).collect();
        placed.sort_unstable();
        for (k, &(s, i)) in placed.iter().enumerate() {
            let x = self.x(s);
            if x + self.tiles[i].width() > self.hw.width_um + TOL {
                return false;
            }
            if let Some(&(s2, _)) = placed.get(k + 1) {
                let need = min_offset(self.tiles[i].width(), self.tiles[i].closed_right(), self.hw);
                if self.x(s2) - x < need - TOL {
                    return false;
                }
            }
        }
        true
    }

    /// (conflicts, energy) of a feasible assignment.
    pub fn energy(&mut self, slots: &[Option<usize>]) -> (usize, f64) {
        let mut conflicts = 0;
        let mut reward = 0.0;
        for i in 0..slots.len() {
            let Some(si) = slots[i] else { continue };
            reward += self.priorities[i];
            for (j, sj) in slots.iter().enumerate().skip(i + 1) {
                if let Some(sj) = *sj {
                    conflicts += self.pair_cost(i, si, j, sj);
                }
            }
        }
        (conflicts, self.alpha * conflicts as f64 - self.beta * reward)
    }

    fn placement_of(&mut self, slots: &[Option<usize>]) -> Placement {
        let (conflicts, cost) = self.energy(slots);
        Placement {
            anchors: slots.iter().map(|s| s.map_or(0.0, |s| self.x(s))).collect(),
            placed: slots.iter().map(Option::is_some).collect(),
            conflicts,
            cost,
        }
    }

    /// Slots where tile `t` fits with every other tile held fixed.
    fn free_slots(&self, slots: &mut [Option<usize>], t: usize) -> Vec<usize> {
        let saved = slots[t];
        let mut out = Vec::new();
        for s in 0..self.slots {
            if Some(s) == saved {
                continue;
            }
            slots[t] = Some(s);
            if self.feasible(slots) {
                out.push(s);
            }
        }
        slots[t] = saved;
        out
    }

    /// Greedy start: tiles by priority per width, each at its left-most fit.
    /// If that strands a tile, left-pack with the most grid-wasteful tile
    /// last instead when this seats more tiles.
    pub fn greedy(&self) -> Vec<Option<usize>> {
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            let ka = self.priorities[a] / self.tiles[a].width().max(TOL);
            let kb = self.priorities[b] / self.tiles[b].width().max(TOL);
            kb.total_cmp(&ka).then(a.cmp(&b))
        });
        let mut slots = vec![None; n];
        for &t in &order {
            slots[t] = (0..self.slots).find(|&s| {
                let mut trial = slots.clone();
                trial[t] = Some(s);
                self.feasible(&trial)
            });
        }
        if slots.iter().all(Option::is_some) {
            return slots;
        }
        let waste = |i: usize| {
            let t = &self.tiles[i];
            grid_span(t.width(), t.closed_right(), self.grid, self.hw) - t.width()
        };
        if let Some(pos) = (0..order.len()).max_by(|&a, &b| waste(order[a]).total_cmp(&waste(order[b])).then(b.cmp(&a)))
        {
            let last = order.remove(pos);
            order.push(last);
        }
        let mut packed = vec![None; n];
        let mut cursor = 0.0f64;
        for &t in &order {
            let s = (cursor / self.grid - 1e-9).ceil() as usize;
            let mut trial = packed.clone();
            trial[t] = Some(s);
            if s < self.slots && self.feasible(&trial) {
                packed = trial;
                let tile = &self.tiles[t];
                cursor = self.x(s) + min_offset(tile.width(), tile.closed_right(), self.hw);
            }
        }
        let count = |v: &[Option<usize>]| v.iter().filter(|s| s.is_some()).count();
        if count(&packed) > count(&slots) {
            packed
        } else {
            slots
        }
    }
}

/// Simulated annealing over grid anchors. Actions: move a tile into free
/// space (placing it if it was unplaced) or swap two tiles' anchors. Returns
/// the best feasible placement seen.
pub fn place(tiles: &[Tile], hw: &HardwareConfig, params: &PlacerParams) -> Placement {
    let mut prob = PlacementProblem::new(tiles, hw, params);
    let n = tiles.len();
    let mut cur = prob.greedy();
    let (_, mut e_cur) = prob.energy(&cur);
    let mut best = cur.clone();
    let mut e_best = e_cur;
    if n == 0 {
        return prob.placement_of(&best);
    }
    let scale = e_cur.abs().max(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(params.sa.seed);
    let mut temp = params.sa.t0;
    for _ in 0..params.sa.iterations {
        let mut next = cur.clone();
        if n < 2 || rng.gen_bool(0.5) {
            let t = rng.gen_range(0..n);
            let free = prob.free_slots(&mut next, t);
            if free.is_empty() {
                temp *= params.sa.gamma;
                continue;
            }
            next[t] = Some(free[rng.gen_range(0..free.len())]);
        } else {
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            next.swap(a, b);
            if next == cur || !prob.feasible(&next) {
                temp *= params.sa.gamma;
                continue;
            }
        }
        let (_, e_next) = prob.energy(&next);
        let delta = e_next - e_cur;
        if delta <= 0.0 || rng.gen::<f64>() < (-delta / scale / temp.max(1e-300)).exp() {
            cur = next;
            e_cur = e_next;
            if e_cur < e_best - 1e-12 {
                best = cur.clone();
                e_best = e_cur;
            }
        }
        temp *= params.sa.gamma;
    }
    prob.placement_of(&best)
}

/// Exhaustive minimum over every anchor assignment (including unplaced).
/// Exponential; intended for small instances.
pub fn place_exhaustive(tiles: &[Tile], hw: &HardwareConfig, params: &PlacerParams) -> Placement {
    let mut prob = PlacementProblem::new(tiles, hw, params);
    let n = tiles.len();
    let mut cur = vec![None; n];
    let mut best = (f64::INFINITY, cur.clone());
    fn rec(
        k: usize,
        cur: &mut Vec<Option<usize>>,
        prob: &mut PlacementProblem<'_>,
        best: &mut (f64, Vec<Option<usize>>),
    ) {
        if k == cur.len() {
            if prob.feasible(cur) {
                let (_, e) = prob.energy(cur);
                if e < best.0 - 1e-12 {
                    *best = (e, cur.clone());
                }
            }
            return;
        }
        for s in std::iter::once(None).chain((0..prob.slots).map(Some)) {
            cur[k] = s;
            if prob.feasible(cur) {
                rec(k + 1, cur, prob, best);
            }
        }
        cur[k] = None;
    }
    rec(0, &mut cur, &mut prob, &mut best);
    prob.placement_of(&best.1)
}
