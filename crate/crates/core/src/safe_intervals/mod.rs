//! Continuous-time collision reasoning between disks moving with piecewise
//! constant velocity.
//!
//! Two disks are in collision while their centers are closer than the
//! clearance (`2r`, or `2r + δ` when planning with inflation). Touching at
//! exactly the clearance is not a collision, so every collision set computed
//! here is open and every safe interval is closed.

mod departure;
mod timeline;

pub use departure::{earliest_safe_departure, departure_conflict, ObstacleIndex};
pub use timeline::{build_cell_timelines, CellTimeline, SafeIntervalTable};

use crate::geometry::{quadratic_roots, Point2};

/// Safe intervals shorter than this are dropped as numerical noise.
pub const MIN_INTERVAL: f64 = 1e-6;

/// Center distance two disks must keep: the sum of radii plus inflation.
pub fn dynamic_clearance(robot_radius: f64, obstacle_radius: f64, inflation: f64) -> f64 {
    robot_radius + obstacle_radius + inflation
}

/// Uniform straight-line motion `origin + velocity·(t − start)` on
/// `[start, end]`; `end` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearMotion {
    /// Position at `start`.
    pub origin: Point2,
    pub velocity: Point2,
    pub start: f64,
    pub end: f64,
}

impl LinearMotion {
    pub fn new(origin: Point2, velocity: Point2, start: f64, end: f64) -> Self {
        debug_assert!(end >= start, "motion ends before it starts");
        LinearMotion { origin, velocity, start, end }
    }

    pub fn stationary(pos: Point2, start: f64, end: f64) -> Self {
        Self::new(pos, Point2::ZERO, start, end)
    }

    /// Motion from `a` at `ta` to `b` at `tb`.
    pub fn between(a: Point2, ta: f64, b: Point2, tb: f64) -> Self {
        let velocity = if tb > ta { (b - a) * (1.0 / (tb - ta)) } else { Point2::ZERO };
        Self::new(a, velocity, ta, tb)
    }

    pub fn position_at(&self, t: f64) -> Point2 {
        self.origin + self.velocity * (t - self.start)
    }

    /// Position at `end` (the origin for unbounded motions, which must be at rest).
    pub fn end_position(&self) -> Point2 {
        if self.end.is_finite() {
            self.position_at(self.end)
        } else {
            self.origin
        }
    }
}

/// Maximal sub-interval of the common time window of `a` and `b` during which
/// their centers are closer than `clearance`. Roots of
/// `|Δp₀ + Δv·τ|² = clearance²`, clipped to the window.
pub fn disk_collision_interval(
    a: &LinearMotion,
    b: &LinearMotion,
    clearance: f64,
) -> Option<(f64, f64)> {
    let t0 = a.start.max(b.start);
    let t1 = a.end.min(b.end);
    if !(t1 > t0) {
        return None;
    }
    let d = a.position_at(t0) - b.position_at(t0);
    let w = a.velocity - b.velocity;
    let (lo, hi) = inside_range(d, w, clearance * clearance, 0.0, t1 - t0)?;
    Some((t0 + lo, t0 + hi))
}

/// Sub-range of `[lo, hi]` where `|d + v·λ|² < c2`, if it has positive length.
pub(crate) fn inside_range(d: Point2, v: Point2, c2: f64, lo: f64, hi: f64) -> Option<(f64, f64)> {
    let a = v.norm_sq();
    let c = d.norm_sq() - c2;
    if a <= 1e-24 {
        return (c < 0.0).then_some((lo, hi));
    }
    let (r1, r2) = quadratic_roots(a, 2.0 * d.dot(v), c)?;
    let (l, h) = (r1.max(lo), r2.min(hi));
    (h > l).then_some((l, h))
}

/// Closed time window `[begin, end]` during which a configuration is free of
/// dynamic-obstacle collisions; `end` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SafeInterval {
    pub begin: f64,
    pub end: f64,
}

impl SafeInterval {
    pub const ALWAYS: SafeInterval = SafeInterval { begin: 0.0, end: f64::INFINITY };

    pub fn new(begin: f64, end: f64) -> Self {
        debug_assert!(begin < end, "empty safe interval [{begin}, {end}]");
        SafeInterval { begin, end }
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.begin && t <= self.end
    }

    pub fn is_unbounded(&self) -> bool {
        self.end.is_infinite()
    }
}
