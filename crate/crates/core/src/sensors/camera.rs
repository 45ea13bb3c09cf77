//! Camera modeled as an occupancy snapshot around the rover.
//!
//! Trapped bodies lie under rubble and never show up here.

use serde::{Deserialize, Serialize, Serializer};

use crate::drive::Pose;
use crate::terrain::{cell_center, cell_of, Cell, Terrain, CELL_M};

pub const CAMERA_RADIUS_M: f64 = 3.0;
/// Cells on each side of the rover's cell; enough to cover the disc from
/// any position inside that cell.
pub const CAMERA_HALF_SPAN: i64 = (CAMERA_RADIUS_M / CELL_M) as i64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellState {
    Free,
    Rubble,
    Unknown,
}

impl CellState {
    fn glyph(self) -> char {
        match self {
            CellState::Free => '.',
            CellState::Rubble => '#',
            CellState::Unknown => '?',
        }
    }
}

/// Square grid, row-major with row 0 at the lowest `iy`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CameraSnapshot {
    pub resolution_m: f64,
    /// World cell of grid element (0, 0).
    pub origin_cell: [i64; 2],
    pub size: usize,
    #[serde(serialize_with = "rows_as_strings")]
    pub cells: Vec<CellState>,
    pub robot_pose: Pose,
}

fn rows_as_strings<S: Serializer>(cells: &[CellState], s: S) -> Result<S::Ok, S::Error> {
    let size = (cells.len() as f64).sqrt() as usize;
    let rows: Vec<String> = cells
        .chunks(size.max(1))
        .map(|row| row.iter().map(|c| c.glyph()).collect())
        .collect();
    rows.serialize(s)
}

impl CameraSnapshot {
    pub fn get(&self, cell: Cell) -> CellState {
        let col = cell.0 - self.origin_cell[0];
        let row = cell.1 - self.origin_cell[1];
        if col < 0 || row < 0 || col as usize >= self.size || row as usize >= self.size {
            return CellState::Unknown;
        }
        self.cells[row as usize * self.size + col as usize]
    }
}

pub fn camera_capture(pose: &Pose, terrain: &Terrain) -> CameraSnapshot {
    let center = cell_of(pose.x_m, pose.y_m);
    let origin = (center.0 - CAMERA_HALF_SPAN, center.1 - CAMERA_HALF_SPAN);
    let size = (2 * CAMERA_HALF_SPAN + 1) as usize;
    let mut cells = Vec::with_capacity(size * size);
    for row in 0..size as i64 {
        for col in 0..size as i64 {
            let cell = (origin.0 + col, origin.1 + row);
            let (cx, cy) = cell_center(cell);
            let state = if pose.distance_to(cx, cy) > CAMERA_RADIUS_M || !terrain.contains_cell(cell) {
                CellState::Unknown
            } else if terrain.is_rubble(cell) {
                CellState::Rubble
            } else {
                CellState::Free
            };
            cells.push(state);
        }
    }
    CameraSnapshot { resolution_m: CELL_M, origin_cell: [origin.0, origin.1], size, cells, robot_pose: *pose }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_ground_is_free_inside_disc() {
        let t = Terrain::open(20.0, 20.0);
        let pose = Pose::new(10.1, 10.2, 0.3);
        let snap = camera_capture(&pose, &t);
        assert_eq!(snap.size, 25);
        let mut free = 0;
        for row in 0..snap.size as i64 {
            for col in 0..snap.size as i64 {
                let cell = (snap.origin_cell[0] + col, snap.origin_cell[1] + row);
                let (cx, cy) = cell_center(cell);
                let inside = pose.distance_to(cx, cy) <= 3.0;
                assert_eq!(snap.get(cell) == CellState::Free, inside);
                free += usize::from(inside);
            }
        }
        // Roughly the disc area in cells.
        assert!((free as f64 - std::f64::consts::PI * 144.0).abs() < 30.0);
    }

    #[test]
    fn disc_fits_in_grid_from_any_offset() {
        let t = Terrain::open(20.0, 20.0);
        for (fx, fy) in [(0.001, 0.001), (0.249, 0.249), (0.001, 0.249), (0.125, 0.125)] {
            let pose = Pose::new(10.0 + fx, 10.0 + fy, 0.0);
            let snap = camera_capture(&pose, &t);
            let c = cell_of(pose.x_m, pose.y_m);
            for dx in -14..=14 {
                for dy in -14..=14 {
                    let cell = (c.0 + dx, c.1 + dy);
                    let (cx, cy) = cell_center(cell);
                    if pose.distance_to(cx, cy) <= 3.0 {
                        assert_eq!(snap.get(cell), CellState::Free);
                    }
                }
            }
        }
    }

    #[test]
    fn rubble_ahead_is_seen() {
        let mut t = Terrain::open(20.0, 20.0);
        let pose = Pose::new(5.0, 5.0, 0.0);
        let ahead = cell_of(6.0, 5.0);
        t.rubble.insert(ahead);
        assert_eq!(camera_capture(&pose, &t).get(ahead), CellState::Rubble);
    }

    #[test]
    fn outside_world_is_unknown() {
        let t = Terrain::open(4.0, 4.0);
        let snap = camera_capture(&Pose::new(0.5, 0.5, 0.0), &t);
        assert_eq!(snap.get((-1, 0)), CellState::Unknown);
        assert_eq!(snap.get((0, 0)), CellState::Free);
    }

    #[test]
    fn serializes_rows() {
        let mut t = Terrain::open(20.0, 20.0);
        t.rubble.insert((40, 40));
        let snap = camera_capture(&Pose::new(10.1, 10.1, 0.0), &t);
        let v = serde_json::to_value(&snap).unwrap();
        let rows = v["cells"].as_array().unwrap();
        assert_eq!(rows.len(), 25);
        assert_eq!(rows[12].as_str().unwrap().chars().nth(12), Some('#'));
        assert_eq!(rows[0].as_str().unwrap().chars().next(), Some('?'));
    }
}
