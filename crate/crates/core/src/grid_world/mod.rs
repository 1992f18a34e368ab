//! Static map, moving obstacles, problem instances and the instance
//! generator.

mod generate;
mod instance;
mod map;
mod obstacle;
pub mod scenario;

pub use generate::{generate_instance, generate_instance_with, GenOptions};
pub use instance::{Configuration, Instance, RobotParams};
pub use map::{Cell, GridMap, CLEARANCE_EPS};
pub use obstacle::{DynamicObstacle, Waypoint};
pub use scenario::{load_instance, load_map, save_instance, InstanceFile};

/// Shorthand for [`GridMap::parse`].
pub fn load_map_text(text: &str) -> crate::Result<GridMap> {
    GridMap::parse(text)
}

/// Shorthand for [`DynamicObstacle::position_at`].
pub fn obstacle_position_at(obs: &DynamicObstacle, t: f64) -> crate::geometry::Point2 {
    obs.position_at(t)
}

/// Shorthand for [`GridMap::line_of_sight_clear`].
pub fn line_of_sight_clear(
    a: crate::geometry::Point2,
    b: crate::geometry::Point2,
    r: f64,
    map: &GridMap,
) -> bool {
    map.line_of_sight_clear(a, b, r)
}
