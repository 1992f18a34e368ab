use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::grid_world::GridMap;
use crate::safe_intervals::LinearMotion;

/// A timed waypoint of an obstacle schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waypoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
}

impl Waypoint {
    pub fn new(pos: Point2, t: f64) -> Self {
        Waypoint { x: pos.x, y: pos.y, t }
    }

    pub fn pos(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

/// A disk moving along straight constant-velocity legs between timed
/// waypoints. Schedules start at `t = 0`; after the last waypoint the
/// obstacle stays where it is forever.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicObstacle {
    radius: f64,
    waypoints: Vec<Waypoint>,
}

impl DynamicObstacle {
    pub fn new(radius: f64, waypoints: Vec<Waypoint>) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::invalid("obstacle", format!("radius {radius} must be positive")));
        }
        let first = waypoints
            .first()
            .ok_or_else(|| Error::invalid("obstacle", "schedule has no waypoints"))?;
        if first.t != 0.0 {
            return Err(Error::invalid(
                "obstacle",
                format!("schedule starts at t = {} instead of 0", first.t),
            ));
        }
        for w in &waypoints {
            if !(w.x.is_finite() && w.y.is_finite() && w.t.is_finite()) {
                return Err(Error::invalid("obstacle", "non-finite waypoint"));
            }
        }
        for pair in waypoints.windows(2) {
            if pair[1].t <= pair[0].t {
                return Err(Error::invalid(
                    "obstacle",
                    format!("waypoint times not increasing ({} then {})", pair[0].t, pair[1].t),
                ));
            }
        }
        Ok(DynamicObstacle { radius, waypoints })
    }

    /// An obstacle sitting at `pos` forever.
    pub fn parked(radius: f64, pos: Point2) -> Result<Self> {
        Self::new(radius, vec![Waypoint::new(pos, 0.0)])
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn waypoints(&self) -> &[Waypoint] {
        &self.waypoints
    }

    /// Time of the last waypoint, after which the obstacle no longer moves.
    pub fn schedule_end(&self) -> f64 {
        self.waypoints.last().map_or(0.0, |w| w.t)
    }

    pub fn final_position(&self) -> Point2 {
        self.waypoints.last().expect("non-empty schedule").pos()
    }

    /// Checks every waypoint against the map: each must be the center of a
    /// free cell.
    pub fn validate_on(&self, map: &GridMap) -> Result<()> {
        for w in &self.waypoints {
            if map.cell_with_center(w.pos()).is_none() {
                return Err(Error::invalid(
                    "obstacle",
                    format!("waypoint ({}, {}) at t = {} is not a free cell center", w.x, w.y, w.t),
                ));
            }
        }
        Ok(())
    }

    pub fn position_at(&self, t: f64) -> Point2 {
        let wps = &self.waypoints;
        let idx = wps.partition_point(|w| w.t <= t);
        if idx == 0 {
            return wps[0].pos();
        }
        if idx == wps.len() {
            return wps[idx - 1].pos();
        }
        let (a, b) = (&wps[idx - 1], &wps[idx]);
        let s = (t - a.t) / (b.t - a.t);
        a.pos() + (b.pos() - a.pos()) * s
    }

    /// Fastest leg speed in m/s.
    pub fn max_speed(&self) -> f64 {
        self.waypoints
            .windows(2)
            .map(|p| p[0].pos().distance(p[1].pos()) / (p[1].t - p[0].t))
            .fold(0.0, f64::max)
    }

    /// The schedule as constant-velocity pieces, ending with an unbounded
    /// resting piece at the last waypoint.
    pub fn segments(&self) -> Vec<LinearMotion> {
        let mut out = Vec::with_capacity(self.waypoints.len());
        for p in self.waypoints.windows(2) {
            out.push(LinearMotion::between(p[0].pos(), p[0].t, p[1].pos(), p[1].t));
        }
        let last = self.waypoints.last().expect("non-empty schedule");
        out.push(LinearMotion::stationary(last.pos(), last.t, f64::INFINITY));
        out
    }
}
