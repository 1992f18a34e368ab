use crate::geometry::Point2;
use crate::grid_world::{DynamicObstacle, GridMap};

use super::{dynamic_clearance, inside_range, LinearMotion, SafeInterval};

/// Open set of departure times `t_d` for which a robot leaving `from` at `t_d`
/// with velocity `velocity` for `duration` seconds comes closer than
/// `clearance` to the obstacle piece `obs`.
///
/// In the plane of (departure time, time into the move) the collision region
/// is the sublevel set of a convex quadratic and the admissible pairs form a
/// parallelogram, so the projection onto departure time is one interval. Its
/// ends are found among the boundary crossings of the parallelogram edges and
/// the tangent points of the quadratic.
pub fn departure_conflict(
    from: Point2,
    velocity: Point2,
    duration: f64,
    obs: &LinearMotion,
    clearance: f64,
) -> Option<(f64, f64)> {
    let c2 = clearance * clearance;
    if obs.end.is_infinite() {
        // Resting forever from obs.start; any close approach after that collides.
        debug_assert!(obs.velocity == Point2::ZERO);
        let (_, s_hi) = inside_range(from - obs.origin, velocity, c2, 0.0, duration)?;
        return Some((obs.start - s_hi, f64::INFINITY));
    }

    let (tq0, tq1) = (obs.start, obs.end);
    let w = obs.velocity;
    let v = velocity - w;
    let k = from - obs.origin + w * tq0;
    // Relative position as a function of (departure, time into move).
    let rel = |td: f64, s: f64| k - w * td + v * s;

    let corners = [(tq0, 0.0), (tq1, 0.0), (tq1 - duration, duration), (tq0 - duration, duration)];
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut push = |td: f64| {
        lo = lo.min(td);
        hi = hi.max(td);
    };

    for i in 0..4 {
        let (p, q) = (corners[i], corners[(i + 1) % 4]);
        let dp = rel(p.0, p.1);
        let dq = rel(q.0, q.1);
        if let Some((l1, l2)) = inside_range(dp, dq - dp, c2, 0.0, 1.0) {
            push(p.0 + l1 * (q.0 - p.0));
            push(p.0 + l2 * (q.0 - p.0));
        }
    }

    let vv = v.norm_sq();
    if vv > 1e-18 {
        let vn = v * (1.0 / vv.sqrt());
        let cw = w.cross(vn);
        if cw.abs() > 1e-12 {
            let ck = k.cross(vn);
            for td in [(ck - clearance) / cw, (ck + clearance) / cw] {
                let s = -(k - w * td).dot(v) / vv;
                let t = td + s;
                if s > 0.0 && s < duration && t > tq0 && t < tq1 {
                    push(td);
                }
            }
        }
    } else {
        let ww = w.norm_sq();
        if ww > 1e-18 {
            let strip = inside_range(k, -w, c2, f64::NEG_INFINITY, f64::INFINITY);
            if let Some((a, b)) = strip {
                for td in [a, b] {
                    if td > tq0 - duration && td < tq1 {
                        push(td);
                    }
                }
            }
        }
    }

    (hi - lo > 1e-12).then_some((lo, hi))
}

/// Earliest `t_d ≥ window.begin` outside every open conflict interval, with
/// `t_d ≤ window.end` and arrival `t_d + duration` no later than `target.end`.
fn earliest_from_conflicts(
    conflicts: &mut [(f64, f64)],
    duration: f64,
    window: SafeInterval,
    target: SafeInterval,
) -> Option<f64> {
    conflicts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut t = window.begin.max(target.begin - duration);
    for &(lo, hi) in conflicts.iter() {
        if lo >= t {
            break;
        }
        if hi > t {
            t = hi;
        }
    }
    (t <= window.end && t + duration <= target.end && t.is_finite()).then_some(t)
}

/// Earliest departure from `from` towards `to` at `speed` such that the robot
/// can rest at `from` until departing (guaranteed by `window`), the straight
/// translation keeps at least `2r + δ` from every obstacle, and the arrival
/// time falls in `target`. `window.begin` is the earliest admissible
/// departure.
#[allow(clippy::too_many_arguments)]
pub fn earliest_safe_departure(
    from: Point2,
    to: Point2,
    speed: f64,
    window: SafeInterval,
    target: SafeInterval,
    obstacles: &[DynamicObstacle],
    robot_radius: f64,
    inflation: f64,
) -> Option<f64> {
    let (velocity, duration) = move_kinematics(from, to, speed);
    let mut conflicts = Vec::new();
    for obs in obstacles {
        let clearance = dynamic_clearance(robot_radius, obs.radius(), inflation);
        for seg in obs.segments() {
            if let Some(iv) = departure_conflict(from, velocity, duration, &seg, clearance) {
                conflicts.push(iv);
            }
        }
    }
    earliest_from_conflicts(&mut conflicts, duration, window, target)
}

pub(crate) fn move_kinematics(from: Point2, to: Point2, speed: f64) -> (Point2, f64) {
    let dist = from.distance(to);
    let duration = dist / speed;
    let velocity = if dist > 0.0 { (to - from) * (speed / dist) } else { Point2::ZERO };
    (velocity, duration)
}

/// Obstacle pieces bucketed by the map cells they can affect, for fast
/// collision queries along straight robot moves.
#[derive(Debug, Clone)]
pub struct ObstacleIndex {
    clearance: f64,
    segments: Vec<LinearMotion>,
    buckets: Vec<Vec<u32>>,
    map: GridMap,
}

impl ObstacleIndex {
    /// Every obstacle is assumed to share `obstacle_radius`, so a single
    /// clearance `2r + δ` applies.
    pub fn new(map: &GridMap, obstacles: &[DynamicObstacle], robot_radius: f64, inflation: f64) -> Self {
        let obstacle_radius = obstacles.first().map_or(robot_radius, |o| o.radius());
        let clearance = dynamic_clearance(robot_radius, obstacle_radius, inflation);
        let mut segments = Vec::new();
        let mut buckets = vec![Vec::new(); map.num_cells()];
        for obs in obstacles {
            debug_assert!((obs.radius() - obstacle_radius).abs() < 1e-12);
            for seg in obs.segments() {
                let idx = segments.len() as u32;
                let (p0, p1) = (seg.origin, seg.end_position());
                let lo = Point2::new(p0.x.min(p1.x) - clearance, p0.y.min(p1.y) - clearance);
                let hi = Point2::new(p0.x.max(p1.x) + clearance, p0.y.max(p1.y) + clearance);
                for cell in map.cells_overlapping(lo, hi) {
                    let Some(id) = map.cell_id(cell) else { continue };
                    if map.cell_rect(cell).distance_to_segment(p0, p1) < clearance {
                        buckets[id].push(idx);
                    }
                }
                segments.push(seg);
            }
        }
        ObstacleIndex { clearance, segments, buckets, map: map.clone() }
    }

    pub fn clearance(&self) -> f64 {
        self.clearance
    }

    /// Indexed pieces that may come within the clearance of the segment
    /// `a`-`b` and overlap the time span `[t_lo, t_hi]`.
    fn candidates(&self, a: Point2, b: Point2, t_lo: f64, t_hi: f64, out: &mut Vec<u32>) {
        out.clear();
        let lo = Point2::new(a.x.min(b.x), a.y.min(b.y));
        let hi = Point2::new(a.x.max(b.x), a.y.max(b.y));
        for cell in self.map.cells_overlapping(lo, hi) {
            let Some(id) = self.map.cell_id(cell) else { continue };
            if self.buckets[id].is_empty() || !self.map.cell_rect(cell).intersects_segment(a, b) {
                continue;
            }
            for &s in &self.buckets[id] {
                let seg = &self.segments[s as usize];
                if seg.end >= t_lo && seg.start <= t_hi {
                    out.push(s);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
    }

    /// Same contract as [`earliest_safe_departure`], restricted to the
    /// indexed obstacles.
    pub fn earliest_departure(
        &self,
        from: Point2,
        to: Point2,
        speed: f64,
        window: SafeInterval,
        target: SafeInterval,
    ) -> Option<f64> {
        let mut conflicts = self.departure_conflicts(from, to, speed, window.begin, window.end);
        let (_, duration) = move_kinematics(from, to, speed);
        earliest_from_conflicts(&mut conflicts, duration, window, target)
    }

    /// Forbidden departure intervals for the move `from`→`to` considering
    /// departures in `[t_lo, t_hi]`.
    pub fn departure_conflicts(
        &self,
        from: Point2,
        to: Point2,
        speed: f64,
        t_lo: f64,
        t_hi: f64,
    ) -> Vec<(f64, f64)> {
        let (velocity, duration) = move_kinematics(from, to, speed);
        let mut ids = Vec::new();
        self.candidates(from, to, t_lo, t_hi + duration, &mut ids);
        ids.iter()
            .filter_map(|&s| {
                departure_conflict(from, velocity, duration, &self.segments[s as usize], self.clearance)
            })
            .collect()
    }

    /// Earliest departure given precomputed conflicts.
    pub fn earliest_with_conflicts(
        conflicts: &mut [(f64, f64)],
        duration: f64,
        window: SafeInterval,
        target: SafeInterval,
    ) -> Option<f64> {
        earliest_from_conflicts(conflicts, duration, window, target)
    }
}
