use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{normalize_angle, shortest_angle_diff, Point2};
use crate::grid_world::Configuration;

/// Search variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// Cardinal moves only, heading ignored.
    Sipp,
    /// Any-angle moves, heading ignored.
    Aa,
    /// Any-angle moves with timed rotations in place.
    Aat,
}

impl Mode {
    pub fn any_angle(self) -> bool {
        !matches!(self, Mode::Sipp)
    }

    pub fn rotations(self) -> bool {
        matches!(self, Mode::Aat)
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sipp" => Ok(Mode::Sipp),
            "aa" | "aa-sipp" => Ok(Mode::Aa),
            "aat" | "aat-sipp" => Ok(Mode::Aat),
            other => Err(Error::invalid("mode", format!("`{other}` (expected sipp, aa or aat)"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Sipp => "sipp",
            Mode::Aa => "aa",
            Mode::Aat => "aat",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Wait,
    Rotate,
    Translate,
}

/// Position (meters) and heading (radians) in serialized plans.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(pos: Point2, theta: f64) -> Self {
        Pose { x: pos.x, y: pos.y, theta }
    }

    pub fn pos(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }
}

impl From<Configuration> for Pose {
    fn from(c: Configuration) -> Self {
        Pose::new(c.pos, c.heading)
    }
}

/// One uniform motion that starts and ends at rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanAction {
    pub kind: ActionKind,
    pub start: Pose,
    pub end: Pose,
    pub t_start: f64,
    pub t_end: f64,
}

impl PlanAction {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }

    /// Pose under uniform linear or angular motion; rotations follow the
    /// shorter arc.
    pub fn pose_at(&self, t: f64) -> Pose {
        let span = self.duration();
        let s = if span > 0.0 { ((t - self.t_start) / span).clamp(0.0, 1.0) } else { 1.0 };
        match self.kind {
            ActionKind::Wait => self.start,
            ActionKind::Translate => {
                let p = self.start.pos() + (self.end.pos() - self.start.pos()) * s;
                Pose::new(p, self.end.theta)
            }
            ActionKind::Rotate => {
                let d = shortest_angle_diff(self.start.theta, self.end.theta);
                Pose::new(self.start.pos(), normalize_angle(self.start.theta + d * s))
            }
        }
    }
}

/// Timed sequence of actions from the start at `t = 0` to the goal at
/// `arrival_time`, after which the robot rests at the goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub mode: Mode,
    /// Inflation δ of the dynamic clearance used while planning, meters.
    pub inflation: f64,
    pub arrival_time: f64,
    pub start: Pose,
    pub actions: Vec<PlanAction>,
}

impl Plan {
    pub fn goal(&self) -> Pose {
        self.actions.last().map_or(self.start, |a| a.end)
    }

    /// Planned pose at `t`, holding the start before `0` and the goal after
    /// arrival.
    pub fn pose_at(&self, t: f64) -> Pose {
        if t <= 0.0 || self.actions.is_empty() {
            return self.actions.first().map_or(self.start, |a| a.start);
        }
        let idx = self.actions.partition_point(|a| a.t_end < t);
        match self.actions.get(idx) {
            Some(a) => a.pose_at(t),
            None => self.goal(),
        }
    }

    pub fn position_at(&self, t: f64) -> Point2 {
        self.pose_at(t).pos()
    }

    /// Contiguity of times and poses, rest-to-rest action shapes and a start
    /// at `t = 0`.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::invalid("plan", msg));
        let mut t = 0.0;
        let mut pose = self.start;
        for (i, a) in self.actions.iter().enumerate() {
            if (a.t_start - t).abs() > 1e-9 {
                return bad(format!("action {i} starts at {} instead of {t}", a.t_start));
            }
            if a.pos_gap(&pose) > 1e-9 {
                return bad(format!("action {i} does not start where the previous one ended"));
            }
            if !(a.t_end > a.t_start) {
                return bad(format!("action {i} has non-positive duration"));
            }
            match a.kind {
                ActionKind::Wait | ActionKind::Rotate => {
                    if a.start.pos().distance(a.end.pos()) > 1e-9 {
                        return bad(format!("action {i} moves while it should stay in place"));
                    }
                }
                ActionKind::Translate => {}
            }
            t = a.t_end;
            pose = a.end;
        }
        if (t - self.arrival_time).abs() > 1e-9 {
            return bad(format!("arrival {} but actions end at {t}", self.arrival_time));
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let plan: Plan = serde_json::from_str(text)?;
        plan.validate()?;
        Ok(plan)
    }
}

impl PlanAction {
    fn pos_gap(&self, prev: &Pose) -> f64 {
        let heading = shortest_angle_diff(prev.theta, self.start.theta).abs();
        self.start.pos().distance(prev.pos()).max(heading)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn sample() -> Plan {
        let p0 = Pose { x: 0.5, y: 0.5, theta: 0.0 };
        let p1 = Pose { x: 0.5, y: 0.5, theta: PI / 2.0 };
        let p2 = Pose { x: 0.5, y: 2.5, theta: PI / 2.0 };
        Plan {
            mode: Mode::Aat,
            inflation: 0.0,
            arrival_time: 3.0,
            start: p0,
            actions: vec![
                PlanAction { kind: ActionKind::Wait, start: p0, end: p0, t_start: 0.0, t_end: 0.5 },
                PlanAction { kind: ActionKind::Rotate, start: p0, end: p1, t_start: 0.5, t_end: 1.0 },
                PlanAction { kind: ActionKind::Translate, start: p1, end: p2, t_start: 1.0, t_end: 3.0 },
            ],
        }
    }

    #[test]
    fn pose_lookup() {
        let plan = sample();
        assert!(plan.validate().is_ok());
        assert_eq!(plan.position_at(0.25), Point2::new(0.5, 0.5));
        assert!((plan.pose_at(0.75).theta - PI / 4.0).abs() < 1e-12);
        assert_eq!(plan.position_at(2.0), Point2::new(0.5, 1.5));
        assert_eq!(plan.position_at(10.0), Point2::new(0.5, 2.5));
    }

    #[test]
    fn json_round_trip() {
        let plan = sample();
        let back = Plan::from_json(&plan.to_json().unwrap()).unwrap();
        assert_eq!(plan, back);
    }

    #[test]
    fn detects_gaps() {
        let mut plan = sample();
        plan.actions[2].t_start = 1.1;
        assert!(plan.validate().is_err());
    }

    #[test]
    fn mode_names() {
        assert_eq!("AAT".parse::<Mode>().unwrap(), Mode::Aat);
        assert_eq!("sipp".parse::<Mode>().unwrap(), Mode::Sipp);
        assert!("astar".parse::<Mode>().is_err());
        assert_eq!(Mode::Aa.to_string(), "aa");
    }
}
