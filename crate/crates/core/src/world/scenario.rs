use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::drive::Pose;
use crate::sensors::{GasSource, WarmBody};
use crate::terrain::{cell_of, Cell, Terrain};

pub const DEFAULT_MAX_TICKS: u64 = 1200;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario parse error: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid scenario field `{field}`: {reason}")]
    Invalid { field: String, reason: String },
}

fn invalid(field: impl Into<String>, reason: impl Into<String>) -> ScenarioError {
    ScenarioError::Invalid { field: field.into(), reason: reason.into() }
}

/// On-disk form; optional fields get defaults in [`Scenario::from_document`].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    #[serde(default)]
    pub name: Option<String>,
    pub world_size_m: [f64; 2],
    #[serde(default)]
    pub rubble: Vec<[i64; 2]>,
    #[serde(default)]
    pub bodies: Vec<WarmBody>,
    #[serde(default)]
    pub gas_sources: Vec<GasSource>,
    #[serde(default)]
    pub base_position: Option<[f64; 2]>,
    #[serde(default)]
    pub robot_start: Option<Pose>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub max_ticks: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub name: String,
    pub terrain: Terrain,
    pub bodies: Vec<WarmBody>,
    pub gas_sources: Vec<GasSource>,
    pub base_position: [f64; 2],
    pub robot_start: Pose,
    pub seed: u64,
    pub max_ticks: u64,
}

/// Parse and validate a JSON scenario.
pub fn load_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let doc: ScenarioDocument = serde_json::from_str(text)?;
    Scenario::from_document(doc)
}

impl Scenario {
    pub fn from_document(doc: ScenarioDocument) -> Result<Self, ScenarioError> {
        let [width, height] = doc.world_size_m;
        if !(width.is_finite() && width > 0.0 && height.is_finite() && height > 0.0) {
            return Err(invalid("world_size_m", "width and height must be positive"));
        }
        let mut terrain = Terrain::open(width, height);
        for (i, &[ix, iy]) in doc.rubble.iter().enumerate() {
            let cell: Cell = (ix, iy);
            if !terrain.contains_cell(cell) {
                return Err(invalid(format!("rubble[{i}]"), format!("cell [{ix}, {iy}] is outside the world")));
            }
            terrain.rubble.insert(cell);
        }

        let robot_start = doc.robot_start.unwrap_or_else(|| Pose::new(width / 2.0, height / 2.0, 0.0));
        let robot_start = Pose::new(robot_start.x_m, robot_start.y_m, robot_start.heading_rad);
        if !terrain.contains(robot_start.x_m, robot_start.y_m) {
            return Err(invalid("robot_start", "outside world bounds"));
        }
        if terrain.is_rubble(cell_of(robot_start.x_m, robot_start.y_m)) {
            return Err(invalid("robot_start", "inside a rubble cell"));
        }

        let base_position = doc.base_position.unwrap_or([robot_start.x_m, robot_start.y_m]);
        if !terrain.contains(base_position[0], base_position[1]) {
            return Err(invalid("base_position", "outside world bounds"));
        }

        let mut ids = HashSet::new();
        for (i, b) in doc.bodies.iter().enumerate() {
            if !terrain.contains(b.position[0], b.position[1]) {
                return Err(invalid(format!("bodies[{i}].position"), "outside world bounds"));
            }
            if !ids.insert(b.id) {
                return Err(invalid(format!("bodies[{i}].id"), format!("duplicate id {}", b.id)));
            }
        }
        for (i, g) in doc.gas_sources.iter().enumerate() {
            if !(g.c0_ppm.is_finite() && g.c0_ppm > 0.0) {
                return Err(invalid(format!("gas_sources[{i}].c0_ppm"), "must be positive"));
            }
            if !(g.r0_m.is_finite() && g.r0_m > 0.0) {
                return Err(invalid(format!("gas_sources[{i}].r0_m"), "must be positive"));
            }
        }

        let max_ticks = doc.max_ticks.unwrap_or(DEFAULT_MAX_TICKS);
        if max_ticks == 0 {
            return Err(invalid("max_ticks", "must be at least 1"));
        }

        Ok(Scenario {
            name: doc.name.unwrap_or_else(|| "unnamed".to_owned()),
            terrain,
            bodies: doc.bodies,
            gas_sources: doc.gas_sources,
            base_position,
            robot_start,
            seed: doc.seed,
            max_ticks,
        })
    }

    pub fn rubble(&self) -> &BTreeSet<Cell> {
        &self.terrain.rubble
    }
}
