//! AOD batch compatibility.

use serde::{Deserialize, Serialize};

use crate::hw::HardwareConfig;
use crate::ir::{same_site, Site, SITE_TOL};

/// One atom transport. `owner` is the tile index, `qubit` the tile-local id.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveOp {
    pub owner: usize,
    pub qubit: usize,
    pub from: Site,
    pub to: Site,
}

impl MoveOp {
    pub fn translated(&self, dx: f64, dy: f64) -> MoveOp {
        MoveOp { from: (self.from.0 + dx, self.from.1 + dy), to: (self.to.0 + dx, self.to.1 + dy), ..*self }
    }

    pub fn distance(&self) -> f64 {
        (self.to.0 - self.from.0).hypot(self.to.1 - self.from.1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    /// Two moves sharing a start row (column) end on different rows (columns).
    Split { a: usize, b: usize, axis: Axis },
    /// Two distinct start rows (columns) end too close together.
    Merge { a: usize, b: usize, axis: Axis },
    /// The order of rows (columns) flips between start and end.
    Cross { a: usize, b: usize, axis: Axis },
    /// A parked atom sits at a crossing of the active AOD grid.
    Pickup { at: Site },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Row,
    Column,
}

fn axis_check(
    (a, b): (usize, usize),
    (s0, s1): (f64, f64),
    (e0, e1): (f64, f64),
    axis: Axis,
    min_sep: f64,
) -> Result<(), Violation> {
    let same_start = (s0 - s1).abs() <= SITE_TOL;
    if same_start {
        if (e0 - e1).abs() > SITE_TOL {
            return Err(Violation::Split { a, b, axis });
        }
        return Ok(());
    }
    if (e0 - e1).abs() < min_sep - SITE_TOL {
        return Err(Violation::Merge { a, b, axis });
    }
    if (s0 < s1) != (e0 < e1) {
        return Err(Violation::Cross { a, b, axis });
    }
    Ok(())
}

/// Whether `moves` can run as one parallel AOD batch.
///
/// `atoms` holds every atom position at batch start (movers included); atoms
/// not moved by the batch must avoid every (batch column, batch row) crossing.
pub fn batch_compatible(moves: &[MoveOp], atoms: &[Site], hw: &HardwareConfig) -> Result<(), Violation> {
    let sep = hw.aod_min_separation_um;
    for i in 0..moves.len() {
        for j in i + 1..moves.len() {
            let (a, b) = (&moves[i], &moves[j]);
            axis_check((i, j), (a.from.1, b.from.1), (a.to.1, b.to.1), Axis::Row, sep)?;
            axis_check((i, j), (a.from.0, b.from.0), (a.to.0, b.to.0), Axis::Column, sep)?;
        }
    }
    for &p in atoms {
        if moves.iter().any(|m| same_site(m.from, p)) {
            continue;
        }
        let on_col = moves.iter().any(|m| (m.from.0 - p.0).abs() <= SITE_TOL);
        let on_row = moves.iter().any(|m| (m.from.1 - p.1).abs() <= SITE_TOL);
        if on_col && on_row {
            return Err(Violation::Pickup { at: p });
        }
    }
    Ok(())
}

/// Pairwise form used for conflict graphs: every atom other than the two
/// movers counts as parked.
pub fn pair_compatible(a: &MoveOp, b: &MoveOp, atoms: &[Site], hw: &HardwareConfig) -> bool {
    batch_compatible(&[*a, *b], atoms, hw).is_ok()
}
