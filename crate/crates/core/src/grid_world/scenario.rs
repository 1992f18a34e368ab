//! JSON instance files. Units: meters, seconds, radians.
//!
//! ```json
//! {
//!   "map_path": "warehouse.map",
//!   "robot": {"radius": 0.5, "v_max": 1.0, "omega_max": 3.14159},
//!   "start": {"x": 0.5, "y": 0.5, "theta": 0.0},
//!   "goal": {"x": 2.5, "y": 2.5},
//!   "obstacles": [{"waypoints": [{"x": 1.5, "y": 0.5, "t": 0.0}]}]
//! }
//! ```
//!
//! `map_path` is resolved relative to the directory holding the instance file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::Point2;
use crate::grid_world::{Configuration, DynamicObstacle, GridMap, Instance, RobotParams, Waypoint};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseSpec {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointSpec {
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObstacleSpec {
    pub waypoints: Vec<Waypoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub map_path: String,
    pub robot: RobotParams,
    pub start: PoseSpec,
    pub goal: PointSpec,
    pub obstacles: Vec<ObstacleSpec>,
}

impl InstanceFile {
    pub fn from_instance(inst: &Instance, map_path: impl Into<String>) -> Self {
        InstanceFile {
            map_path: map_path.into(),
            robot: inst.robot,
            start: PoseSpec { x: inst.start.pos.x, y: inst.start.pos.y, theta: inst.start.heading },
            goal: PointSpec { x: inst.goal.x, y: inst.goal.y },
            obstacles: inst
                .obstacles
                .iter()
                .map(|o| ObstacleSpec { waypoints: o.waypoints().to_vec() })
                .collect(),
        }
    }

    /// Obstacles share the robot radius.
    pub fn into_instance(self, map: GridMap) -> Result<Instance> {
        let obstacles = self
            .obstacles
            .into_iter()
            .map(|o| DynamicObstacle::new(self.robot.radius, o.waypoints))
            .collect::<Result<Vec<_>>>()?;
        Instance::new(
            map,
            obstacles,
            Configuration::new(Point2::new(self.start.x, self.start.y), self.start.theta),
            Point2::new(self.goal.x, self.goal.y),
            self.robot,
        )
    }
}

pub fn load_map(path: impl AsRef<Path>) -> Result<GridMap> {
    GridMap::parse(&fs::read_to_string(path)?)
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let path = path.as_ref();
    let file: InstanceFile = serde_json::from_str(&fs::read_to_string(path)?)?;
    let map_path = resolve(path, &file.map_path);
    let map = load_map(&map_path)?;
    file.into_instance(map)
}

/// Writes the map text to `map_path` and the instance JSON to
/// `instance_path`, referencing the map relative to the instance file when
/// both share a directory.
pub fn save_instance(
    inst: &Instance,
    instance_path: impl AsRef<Path>,
    map_path: impl AsRef<Path>,
) -> Result<()> {
    let (instance_path, map_path) = (instance_path.as_ref(), map_path.as_ref());
    fs::write(map_path, inst.map.to_text())?;
    let reference = match (instance_path.parent(), map_path.parent(), map_path.file_name()) {
        (Some(a), Some(b), Some(name)) if a == b => PathBuf::from(name),
        _ => map_path.to_path_buf(),
    };
    let file = InstanceFile::from_instance(inst, reference.to_string_lossy());
    fs::write(instance_path, serde_json::to_string_pretty(&file)? + "\n")?;
    Ok(())
}

fn resolve(instance_path: &Path, map_path: &str) -> PathBuf {
    let p = Path::new(map_path);
    if p.is_absolute() {
        return p.to_path_buf();
    }
    instance_path.parent().map_or_else(|| p.to_path_buf(), |dir| dir.join(p))
}
