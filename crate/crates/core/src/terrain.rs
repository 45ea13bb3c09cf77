use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

/// Edge length of one rubble cell.
pub const CELL_M: f64 = 0.25;

/// Integer cell coordinates `[ix, iy]` at [`CELL_M`] pitch.
pub type Cell = (i64, i64);

pub fn cell_of(x_m: f64, y_m: f64) -> Cell {
    ((x_m / CELL_M).floor() as i64, (y_m / CELL_M).floor() as i64)
}

pub fn cell_center(c: Cell) -> (f64, f64) {
    ((c.0 as f64 + 0.5) * CELL_M, (c.1 as f64 + 0.5) * CELL_M)
}

/// Rectangular world `[0, width) × [0, height)` with a rubble occupancy set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Terrain {
    pub width_m: f64,
    pub height_m: f64,
    pub rubble: BTreeSet<Cell>,
}

impl Terrain {
    pub fn open(width_m: f64, height_m: f64) -> Self {
        Self { width_m, height_m, rubble: BTreeSet::new() }
    }

    pub fn contains(&self, x_m: f64, y_m: f64) -> bool {
        x_m >= 0.0 && y_m >= 0.0 && x_m < self.width_m && y_m < self.height_m
    }

    pub fn contains_cell(&self, c: Cell) -> bool {
        let (x, y) = cell_center(c);
        c.0 >= 0 && c.1 >= 0 && self.contains(x, y)
    }

    pub fn is_rubble(&self, c: Cell) -> bool {
        self.rubble.contains(&c)
    }

    /// True if a robot centered at `(x, y)` may not occupy that spot.
    pub fn is_blocked(&self, x_m: f64, y_m: f64) -> bool {
        !self.contains(x_m, y_m) || self.is_rubble(cell_of(x_m, y_m))
    }
}
