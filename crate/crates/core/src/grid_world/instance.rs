use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, Point2};
use crate::grid_world::{DynamicObstacle, GridMap};

/// Robot position (a cell center, meters) and heading in `[0, 2π)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Configuration {
    pub pos: Point2,
    pub heading: f64,
}

impl Configuration {
    pub fn new(pos: Point2, heading: f64) -> Self {
        Configuration { pos, heading: normalize_angle(heading) }
    }
}

/// Disk radius and the nominal speeds used for planning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobotParams {
    /// Meters.
    pub radius: f64,
    /// Translation speed, m/s.
    pub v_max: f64,
    /// Rotation speed, rad/s.
    pub omega_max: f64,
}

impl RobotParams {
    /// Radius half a cell, 1 m/s and 180°/s.
    pub fn for_cell_size(cell_size: f64) -> Self {
        RobotParams { radius: 0.5 * cell_size, v_max: 1.0, omega_max: PI }
    }

    fn validate(&self) -> Result<()> {
        let ok = |v: f64| v > 0.0 && v.is_finite();
        if !ok(self.radius) || !ok(self.v_max) || !ok(self.omega_max) {
            return Err(Error::invalid("robot", format!("non-positive parameter in {self:?}")));
        }
        Ok(())
    }
}

/// A navigation task: map, moving obstacles, start configuration and goal.
#[derive(Debug, Clone)]
pub struct Instance {
    pub map: GridMap,
    pub obstacles: Vec<DynamicObstacle>,
    pub start: Configuration,
    pub goal: Point2,
    pub robot: RobotParams,
}

impl Instance {
    pub fn new(
        map: GridMap,
        obstacles: Vec<DynamicObstacle>,
        start: Configuration,
        goal: Point2,
        robot: RobotParams,
    ) -> Result<Self> {
        let inst = Instance { map, obstacles, start, goal, robot };
        inst.validate()?;
        Ok(inst)
    }

    /// Start and goal are free cell centers, obstacle schedules stay on free
    /// cell centers, and no obstacle overlaps the robot at `t = 0`.
    pub fn validate(&self) -> Result<()> {
        self.robot.validate()?;
        if self.map.cell_with_center(self.start.pos).is_none() {
            return Err(Error::invalid("instance", "start is not a free cell center"));
        }
        if self.map.cell_with_center(self.goal).is_none() {
            return Err(Error::invalid("instance", "goal is not a free cell center"));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            o.validate_on(&self.map)
                .map_err(|e| Error::invalid("instance", format!("obstacle {i}: {e}")))?;
            let gap = o.position_at(0.0).distance(self.start.pos);
            if gap < self.robot.radius + o.radius() - 1e-9 {
                return Err(Error::invalid(
                    "instance",
                    format!("obstacle {i} overlaps the start at t = 0 (distance {gap:.4})"),
                ));
            }
        }
        Ok(())
    }

    pub fn start_cell(&self) -> crate::grid_world::Cell {
        self.map.cell_at(self.start.pos)
    }

    pub fn goal_cell(&self) -> crate::grid_world::Cell {
        self.map.cell_at(self.goal)
    }

    /// Latest waypoint time over all obstacles.
    pub fn schedule_horizon(&self) -> f64 {
        self.obstacles.iter().map(|o| o.schedule_end()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid_world::Waypoint;

    #[test]
    fn rejects_start_overlap() {
        let map = GridMap::new(3, 1, 1.0).unwrap();
        let robot = RobotParams::for_cell_size(1.0);
        let start = Configuration::new(Point2::new(0.5, 0.5), 0.0);
        let goal = Point2::new(2.5, 0.5);
        let close = DynamicObstacle::new(0.5, vec![Waypoint { x: 0.5, y: 0.5, t: 0.0 }]).unwrap();
        assert!(Instance::new(map.clone(), vec![close], start, goal, robot).is_err());
        // Adjacent is tangent, which is allowed.
        let adj = DynamicObstacle::new(0.5, vec![Waypoint { x: 1.5, y: 0.5, t: 0.0 }]).unwrap();
        assert!(Instance::new(map, vec![adj], start, goal, robot).is_ok());
    }

    #[test]
    fn rejects_blocked_goal() {
        let map = GridMap::parse("2 1 1.0\n.@\n").unwrap();
        let robot = RobotParams::for_cell_size(1.0);
        let start = Configuration::new(Point2::new(0.5, 0.5), 0.0);
        assert!(Instance::new(map, vec![], start, Point2::new(1.5, 0.5), robot).is_err());
    }

    #[test]
    fn heading_normalized() {
        let c = Configuration::new(Point2::ZERO, -PI / 2.0);
        assert!((c.heading - 1.5 * PI).abs() < 1e-12);
    }
}
