//! Turns a plan of uniform rest-to-rest actions into a reference trajectory
//! with bounded acceleration.
//!
//! Translations get a per-axis three-phase profile (accelerate, cruise,
//! decelerate), rotations a cubic in the heading, waits constant pieces. All
//! three coordinates are kept as piecewise polynomials; the heading is stored
//! unwrapped so it stays continuous across segments.

mod profile;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use profile::{
    axis_accel_bound, cruise_velocity, refine_rotation, refine_translation, AxisProfile, Fallback,
    PolynomialPiece,
};

use crate::error::{Error, Result};
use crate::geometry::{shortest_angle_diff, Point2};
use crate::planner::{ActionKind, Plan, PlanAction, Pose};

/// A fallback profile that made segment `segment` end `overrun` seconds late.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefineWarning {
    pub segment: usize,
    pub fallback: Fallback,
    pub overrun: f64,
}

/// Time window of one refined plan action.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentSpan {
    pub kind: ActionKind,
    pub t_start: f64,
    pub t_end: f64,
}

/// Reference value and its first two derivatives for all coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RefSample {
    pub pos: [f64; 3],
    pub vel: [f64; 3],
    pub acc: [f64; 3],
}

impl RefSample {
    pub fn position(&self) -> Point2 {
        Point2::new(self.pos[0], self.pos[1])
    }
}

/// Piecewise-polynomial `x*(t)`, `y*(t)`, `θ*(t)` covering `[0, end]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceTrajectory {
    pub a_max: f64,
    pub v_max: f64,
    /// Indexed by coordinate: x, y, θ.
    pub pieces: [Vec<PolynomialPiece>; 3],
    pub segments: Vec<SegmentSpan>,
    pub warnings: Vec<RefineWarning>,
}

impl ReferenceTrajectory {
    /// Empty trajectory; `push_segment` appends to it.
    pub fn new(a_max: f64, v_max: f64) -> Self {
        ReferenceTrajectory {
            a_max,
            v_max,
            pieces: [Vec::new(), Vec::new(), Vec::new()],
            segments: Vec::new(),
            warnings: Vec::new(),
        }
    }

    pub fn end_time(&self) -> f64 {
        self.segments.last().map_or(0.0, |s| s.t_end)
    }

    /// Total delay accumulated by fallback profiles.
    pub fn overrun(&self) -> f64 {
        self.warnings.iter().map(|w| w.overrun).sum()
    }

    /// Refines `action` starting from `from` (heading possibly unwrapped) at
    /// `t0`, keeping its planned duration and end pose. Returns the end time.
    pub fn push_segment(&mut self, action: &PlanAction, from: Pose, t0: f64) -> f64 {
        let index = self.segments.len();
        let tf = t0 + action.duration();
        let target = action.end;
        let (dx, dy) = (target.x - from.x, target.y - from.y);

        let mut t_end = tf;
        let mut fallback = None;
        let (xs, ys) = if dx == 0.0 && dy == 0.0 {
            (vec![PolynomialPiece::constant(from.x, t0, tf)], vec![PolynomialPiece::constant(from.y, t0, tf)])
        } else {
            let dir = dy.atan2(dx);
            let (ax, ay) = axis_accel_bound(self.a_max, dir);
            let (vx, vy) = axis_accel_bound(self.v_max, dir);
            let px = refine_translation(from.x, target.x, t0, tf, ax, vx);
            let py = refine_translation(from.y, target.y, t0, tf, ay, vy);
            t_end = px.t_end.max(py.t_end);
            fallback = px.fallback.or(py.fallback);
            (pad(px.pieces, t_end), pad(py.pieces, t_end))
        };

        let theta_target = from.theta + shortest_angle_diff(from.theta, target.theta);
        let mut theta = vec![refine_rotation(from.theta, theta_target, t0, tf)];
        if t_end > tf {
            theta.push(PolynomialPiece::constant(theta_target, tf, t_end));
        }
        if let Some(fb) = fallback {
            self.warnings.push(RefineWarning { segment: index, fallback: fb, overrun: t_end - tf });
        }
        let span = tf - t0;
        if span > 0.0 {
            let peak = 1.5 * (theta_target - from.theta).abs() / span;
            log::trace!("segment {index}: peak turn rate {peak:.3} rad/s");
        }

        self.pieces[0].extend(xs);
        self.pieces[1].extend(ys);
        self.pieces[2].extend(theta);
        self.segments.push(SegmentSpan { kind: action.kind, t_start: t0, t_end });
        t_end
    }

    /// End pose of the reference so far, heading unwrapped.
    pub fn end_pose(&self) -> Option<Pose> {
        let t = self.end_time();
        let last = |c: usize| self.pieces[c].last().map(|p| p.value(t));
        Some(Pose { x: last(0)?, y: last(1)?, theta: last(2)? })
    }

    /// Values and derivatives at `t`; clamps to rest at the ends.
    pub fn sample(&self, t: f64) -> RefSample {
        let mut out = RefSample::default();
        for c in 0..3 {
            let pieces = &self.pieces[c];
            let Some(first) = pieces.first() else { continue };
            if t <= first.t_a {
                out.pos[c] = first.value(first.t_a);
                continue;
            }
            // Half-open windows: at a boundary the later piece applies.
            let idx = pieces.partition_point(|p| p.t_b <= t);
            match pieces.get(idx) {
                Some(p) => {
                    out.pos[c] = p.value(t);
                    out.vel[c] = p.velocity(t);
                    out.acc[c] = p.acceleration(t);
                }
                None => {
                    let p = pieces.last().expect("non-empty");
                    out.pos[c] = p.value(p.t_b);
                }
            }
        }
        out
    }

    /// Rows of `t,x,y,theta,vx,vy,omega` every `period` seconds, end included.
    pub fn to_csv(&self, period: f64) -> Result<String> {
        if !(period > 0.0) {
            return Err(Error::invalid("sample period", format!("{period} (must be positive)")));
        }
        let mut out = String::from("t,x,y,theta,vx,vy,omega\n");
        let end = self.end_time();
        let n = (end / period).floor() as usize;
        let mut times: Vec<f64> = (0..=n).map(|i| i as f64 * period).collect();
        if end - n as f64 * period > 1e-9 {
            times.push(end);
        }
        for t in times {
            let s = self.sample(t);
            let _ = writeln!(
                out,
                "{t:.6},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9}",
                s.pos[0], s.pos[1], s.pos[2], s.vel[0], s.vel[1], s.vel[2]
            );
        }
        Ok(out)
    }
}

/// Holds the last value until `t_end` when the other axis ran longer.
fn pad(mut pieces: Vec<PolynomialPiece>, t_end: f64) -> Vec<PolynomialPiece> {
    let last = *pieces.last().expect("profiles are non-empty");
    if t_end > last.t_b {
        pieces.push(PolynomialPiece::constant(last.value(last.t_b), last.t_b, t_end));
    }
    pieces
}

pub(crate) fn check_bounds(a_max: f64, v_max: f64) -> Result<()> {
    if !(a_max > 0.0 && a_max.is_finite()) {
        return Err(Error::invalid("a_max", format!("{a_max} (must be positive)")));
    }
    if !(v_max > 0.0 && v_max.is_finite()) {
        return Err(Error::invalid("v_max", format!("{v_max} (must be positive)")));
    }
    Ok(())
}

/// Refines every action of `plan` from its planned start pose. A fallback
/// overrun delays all later segments by the same amount.
pub fn refine_plan(plan: &Plan, a_max: f64, v_max: f64) -> Result<ReferenceTrajectory> {
    check_bounds(a_max, v_max)?;
    plan.validate()?;
    let mut traj = ReferenceTrajectory::new(a_max, v_max);
    let mut t = 0.0;
    let mut theta = plan.start.theta;
    for action in &plan.actions {
        let from = Pose { theta, ..action.start };
        t = traj.push_segment(action, from, t);
        theta = traj.end_pose().expect("segment pushed").theta;
    }
    if plan.actions.is_empty() {
        // Start is the goal: a zero-length rest keeps `sample` well-defined.
        for (c, v) in [plan.start.x, plan.start.y, plan.start.theta].into_iter().enumerate() {
            traj.pieces[c].push(PolynomialPiece::constant(v, 0.0, 0.0));
        }
        traj.segments.push(SegmentSpan { kind: ActionKind::Wait, t_start: 0.0, t_end: 0.0 });
    }
    for w in &traj.warnings {
        log::warn!("segment {} ends {:.3} s late ({:?} profile)", w.segment, w.overrun, w.fallback);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

    use super::*;
    use crate::planner::Mode;

    fn action(kind: ActionKind, start: Pose, end: Pose, t0: f64, t1: f64) -> PlanAction {
        PlanAction { kind, start, end, t_start: t0, t_end: t1 }
    }

    fn plan_of(actions: Vec<PlanAction>) -> Plan {
        Plan {
            mode: Mode::Aat,
            inflation: 0.0,
            arrival_time: actions.last().unwrap().t_end,
            start: actions[0].start,
            actions,
        }
    }

    #[test]
    fn wait_only() {
        let p = Pose { x: 0.5, y: 1.5, theta: 0.3 };
        let traj = refine_plan(&plan_of(vec![action(ActionKind::Wait, p, p, 0.0, 2.0)]), 5.0, 1.0).unwrap();
        for t in [0.0, 0.7, 2.0, 5.0] {
            let s = traj.sample(t);
            assert_eq!(s.pos, [0.5, 1.5, 0.3]);
            assert_eq!(s.vel, [0.0; 3]);
        }
    }

    #[test]
    fn diagonal_stays_straight() {
        let a = Pose { x: 0.5, y: 0.5, theta: FRAC_PI_4 };
        let b = Pose { x: 2.5, y: 2.5, theta: FRAC_PI_4 };
        let t1 = 2.0 * 2f64.sqrt();
        let traj = refine_plan(&plan_of(vec![action(ActionKind::Translate, a, b, 0.0, t1)]), 5.0, 1.0).unwrap();
        assert!(traj.warnings.is_empty());
        let mut t = 0.0;
        while t <= t1 {
            let s = traj.sample(t);
            assert!((s.pos[0] - s.pos[1]).abs() < 1e-9);
            t += 1e-3;
        }
        let end = traj.sample(t1);
        assert!((end.pos[0] - 2.5).abs() < 1e-9 && end.vel[0].abs() < 1e-9);
    }

    #[test]
    fn rotate_then_translate() {
        let p0 = Pose { x: 0.5, y: 0.5, theta: 0.0 };
        let p1 = Pose { x: 0.5, y: 0.5, theta: FRAC_PI_2 };
        let p2 = Pose { x: 0.5, y: 1.5, theta: FRAC_PI_2 };
        let plan = plan_of(vec![
            action(ActionKind::Rotate, p0, p1, 0.0, 0.5),
            action(ActionKind::Translate, p1, p2, 0.5, 1.5),
        ]);
        let traj = refine_plan(&plan, 5.0, 1.0).unwrap();
        assert!((traj.sample(0.25).pos[2] - FRAC_PI_4).abs() < 1e-12);
        assert!((traj.sample(0.25).vel[2] - 1.5 * PI).abs() < 1e-12);
        let end = traj.sample(1.5);
        assert!((end.pos[1] - 1.5).abs() < 1e-9);
        assert_eq!(traj.end_time(), 1.5);
    }

    #[test]
    fn overrun_shifts_later_segments() {
        let p0 = Pose { x: 0.5, y: 0.5, theta: 0.0 };
        let p1 = Pose { x: 1.5, y: 0.5, theta: 0.0 };
        let plan = plan_of(vec![
            action(ActionKind::Translate, p0, p1, 0.0, 1.0),
            action(ActionKind::Wait, p1, p1, 1.0, 2.0),
        ]);
        let traj = refine_plan(&plan, 3.0, 1.0).unwrap();
        assert_eq!(traj.warnings.len(), 1);
        assert!((traj.overrun() - 1.0 / 3.0).abs() < 1e-12);
        assert!((traj.end_time() - (2.0 + 1.0 / 3.0)).abs() < 1e-12);
        assert!((traj.segments[1].t_start - (1.0 + 1.0 / 3.0)).abs() < 1e-12);
    }

    #[test]
    fn heading_unwraps_across_segments() {
        let p0 = Pose { x: 0.5, y: 0.5, theta: 0.2 };
        let p1 = Pose { x: 0.5, y: 0.5, theta: 2.0 * PI - 0.2 };
        let traj =
            refine_plan(&plan_of(vec![action(ActionKind::Rotate, p0, p1, 0.0, 0.4 / PI)]), 5.0, 1.0).unwrap();
        assert!((traj.end_pose().unwrap().theta + 0.2).abs() < 1e-12);
    }

    #[test]
    fn csv_rows() {
        let p = Pose { x: 0.5, y: 0.5, theta: 0.0 };
        let traj = refine_plan(&plan_of(vec![action(ActionKind::Wait, p, p, 0.0, 0.25)]), 5.0, 1.0).unwrap();
        let csv = traj.to_csv(0.1).unwrap();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "t,x,y,theta,vx,vy,omega");
        assert_eq!(lines.len(), 1 + 4);
        assert!(lines[4].starts_with("0.250000,"));
        assert!(traj.to_csv(0.0).is_err());
    }

    #[test]
    fn rejects_bad_bounds() {
        let p = Pose { x: 0.5, y: 0.5, theta: 0.0 };
        let plan = plan_of(vec![action(ActionKind::Wait, p, p, 0.0, 1.0)]);
        assert!(refine_plan(&plan, 0.0, 1.0).is_err());
        assert!(refine_plan(&plan, 5.0, f64::NAN).is_err());
    }
}
