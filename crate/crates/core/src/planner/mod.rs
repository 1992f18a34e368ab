//! Heuristic search over (configuration, safe interval) states.
//!
//! Three variants share one search loop:
//!
//! * [`Mode::Sipp`]: moves to the four cardinal neighbors.
//! * [`Mode::Aa`]: moves to the eight neighbors, plus a shortcut from the
//!   parent of the expanded state whenever the parent sees the neighbor.
//! * [`Mode::Aat`]: as `Aa`, but the robot has to turn in place to face each
//!   move direction. Turning costs time, and a duplicate state is dominated
//!   only when it cannot catch up by turning: `g(s') ≥ g(s'') + dur_rot`.

mod plan;
mod search;

pub use plan::{ActionKind, Mode, Plan, PlanAction, Pose};
pub use search::SearchStats;

use crate::geometry::{shortest_angle_diff, Point2};
use crate::grid_world::Instance;
use crate::safe_intervals::{build_cell_timelines, ObstacleIndex, SafeIntervalTable};

use search::Search;

/// Straight-line travel time to the goal at full speed. Rotation time is
/// ignored, which keeps it admissible and consistent in every mode.
pub fn heuristic(pos: Point2, goal: Point2, v_max: f64) -> f64 {
    pos.distance(goal) / v_max
}

/// Time to turn in place between two headings along the shorter arc.
pub fn dur_rot(from: f64, to: f64, omega_max: f64) -> f64 {
    shortest_angle_diff(from, to).abs() / omega_max
}

/// Safe-interval tables and the obstacle index for one (instance, δ) pair;
/// immutable and reusable across modes.
pub struct Planner<'a> {
    instance: &'a Instance,
    inflation: f64,
    timelines: SafeIntervalTable,
    index: ObstacleIndex,
}

impl<'a> Planner<'a> {
    pub fn new(instance: &'a Instance, inflation: f64) -> Self {
        let r = instance.robot.radius;
        Planner {
            instance,
            inflation,
            timelines: build_cell_timelines(&instance.map, &instance.obstacles, r, inflation),
            index: ObstacleIndex::new(&instance.map, &instance.obstacles, r, inflation),
        }
    }

    pub fn timelines(&self) -> &SafeIntervalTable {
        &self.timelines
    }

    pub fn inflation(&self) -> f64 {
        self.inflation
    }

    /// Plans with the instance's nominal speeds.
    pub fn plan(&self, mode: Mode) -> Option<Plan> {
        self.plan_with_stats(mode, self.instance.robot.v_max, self.instance.robot.omega_max).0
    }

    pub fn plan_with_stats(&self, mode: Mode, v_max: f64, omega_max: f64) -> (Option<Plan>, SearchStats) {
        Search {
            inst: self.instance,
            timelines: &self.timelines,
            index: &self.index,
            mode,
            inflation: self.inflation,
            v_max,
            omega_max,
        }
        .run()
    }
}

/// One-shot planning: builds the tables for `inflation` and searches.
/// `None` when the search space holds no plan.
pub fn plan(instance: &Instance, mode: Mode, inflation: f64, v_max: f64, omega_max: f64) -> Option<Plan> {
    Planner::new(instance, inflation).plan_with_stats(mode, v_max, omega_max).0
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{PI, SQRT_2};

    use super::*;
    use crate::grid_world::{Configuration, DynamicObstacle, GridMap, RobotParams, Waypoint};

    fn open_3x3() -> Instance {
        let map = GridMap::new(3, 3, 1.0).unwrap();
        Instance::new(
            map,
            vec![],
            Configuration::new(Point2::new(0.5, 0.5), 0.0),
            Point2::new(2.5, 2.5),
            RobotParams::for_cell_size(1.0),
        )
        .unwrap()
    }

    fn arrival(inst: &Instance, mode: Mode) -> f64 {
        let plan = plan(inst, mode, 0.0, 1.0, PI).expect("plan");
        plan.validate().unwrap();
        plan.arrival_time
    }

    #[test]
    fn heuristic_values() {
        assert_eq!(heuristic(Point2::new(1.0, 1.0), Point2::new(1.0, 1.0), 1.0), 0.0);
        assert_eq!(heuristic(Point2::ZERO, Point2::new(3.0, 0.0), 1.0), 3.0);
    }

    #[test]
    fn rotation_durations() {
        assert_eq!(dur_rot(1.0, 1.0, PI), 0.0);
        assert!((dur_rot(0.0, PI / 2.0, PI) - 0.5).abs() < 1e-12);
        assert!((dur_rot(0.0, 1.5 * PI, PI) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sipp_on_open_grid() {
        assert!((arrival(&open_3x3(), Mode::Sipp) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn any_angle_on_open_grid() {
        assert!((arrival(&open_3x3(), Mode::Aa) - 2.0 * SQRT_2).abs() < 1e-9);
    }

    #[test]
    fn rotations_on_open_grid() {
        let t = arrival(&open_3x3(), Mode::Aat);
        assert!((t - (0.25 + 2.0 * SQRT_2)).abs() < 1e-9, "{t}");
        let plan = plan(&open_3x3(), Mode::Aat, 0.0, 1.0, PI).unwrap();
        let kinds: Vec<_> = plan.actions.iter().map(|a| a.kind).collect();
        assert_eq!(kinds[0], ActionKind::Rotate);
        assert!(kinds[1..].iter().all(|&k| k == ActionKind::Translate));
    }

    #[test]
    fn parked_obstacle_on_goal_means_no_plan() {
        let mut inst = open_3x3();
        inst.obstacles.push(DynamicObstacle::parked(0.5, Point2::new(2.5, 2.5)).unwrap());
        for mode in [Mode::Sipp, Mode::Aa, Mode::Aat] {
            assert!(plan(&inst, mode, 0.0, 1.0, PI).is_none());
        }
    }

    #[test]
    fn waits_for_crossing_obstacle() {
        // Plus-shaped map: the robot crosses left to right while an obstacle
        // sweeps up the middle column between t = 1 and t = 3.
        let mut blocked = vec![false; 9];
        for id in [0, 2, 6, 8] {
            blocked[id] = true;
        }
        let map = GridMap::from_blocked(3, 3, 1.0, blocked).unwrap();
        let obs = DynamicObstacle::new(
            0.5,
            vec![
                Waypoint { x: 1.5, y: 0.5, t: 0.0 },
                Waypoint { x: 1.5, y: 0.5, t: 1.0 },
                Waypoint { x: 1.5, y: 2.5, t: 3.0 },
            ],
        )
        .unwrap();
        let inst = Instance::new(
            map,
            vec![obs],
            Configuration::new(Point2::new(0.5, 1.5), 0.0),
            Point2::new(2.5, 1.5),
            RobotParams::for_cell_size(1.0),
        )
        .unwrap();
        for mode in [Mode::Sipp, Mode::Aa, Mode::Aat] {
            let plan = plan(&inst, mode, 0.0, 1.0, PI).expect("plan");
            plan.validate().unwrap();
            assert!(plan.arrival_time > 2.0 + 1e-6, "{mode}: {}", plan.arrival_time);
            assert!(plan.actions.iter().any(|a| a.kind == ActionKind::Wait));
        }
    }

    #[test]
    fn deterministic() {
        let a = plan(&open_3x3(), Mode::Aat, 0.1, 1.0, PI);
        let b = plan(&open_3x3(), Mode::Aat, 0.1, 1.0, PI);
        assert_eq!(a, b);
    }
}
