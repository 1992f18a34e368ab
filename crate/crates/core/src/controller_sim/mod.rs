//! Closed-loop execution of a reference trajectory.
//!
//! Each coordinate is a double integrator `q̈ = u` driven by the feedback
//! `u = (λ₁+λ₂)(q̇ − q̇*) − λ₁λ₂(q − q*)`, integrated with classic RK4. Every
//! integration step is audited against walls and moving obstacles.

mod simulate;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use simulate::{simulate, simulate_reference};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::planner::Plan;
use crate::refiner::ReferenceTrajectory;

/// Characteristic roots of the closed-loop error dynamics, 1/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlGains {
    pub lambda1: f64,
    pub lambda2: f64,
}

impl ControlGains {
    pub fn new(lambda1: f64, lambda2: f64) -> Result<Self> {
        if !(lambda1 < 0.0 && lambda2 < 0.0 && lambda1.is_finite() && lambda2.is_finite()) {
            return Err(Error::invalid(
                "gains",
                format!("({lambda1}, {lambda2}): both roots must be finite and negative"),
            ));
        }
        Ok(ControlGains { lambda1, lambda2 })
    }
}

impl Default for ControlGains {
    fn default() -> Self {
        ControlGains { lambda1: -4.0, lambda2: -5.0 }
    }
}

/// Feedback acceleration for one coordinate.
pub fn control(q: f64, q_dot: f64, q_ref: f64, q_ref_dot: f64, gains: ControlGains) -> f64 {
    let ControlGains { lambda1: l1, lambda2: l2 } = gains;
    (l1 + l2) * (q_dot - q_ref_dot) - l1 * l2 * (q - q_ref)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RobotState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub vx: f64,
    pub vy: f64,
    pub omega: f64,
    pub t: f64,
}

impl RobotState {
    /// At rest at `(x, y, theta)` at time 0.
    pub fn at_rest(x: f64, y: f64, theta: f64) -> Self {
        RobotState { x, y, theta, ..Default::default() }
    }

    pub fn position(&self) -> Point2 {
        Point2::new(self.x, self.y)
    }

    pub fn is_finite(&self) -> bool {
        [self.x, self.y, self.theta, self.vx, self.vy, self.omega].iter().all(|v| v.is_finite())
    }

    pub(crate) fn coords(&self) -> [(f64, f64); 3] {
        [(self.x, self.vx), (self.y, self.vy), (self.theta, self.omega)]
    }

    pub(crate) fn set_coords(&mut self, c: [(f64, f64); 3]) {
        (self.x, self.vx) = c[0];
        (self.y, self.vy) = c[1];
        (self.theta, self.omega) = c[2];
    }
}

/// Simulation knobs; defaults follow the nominal protocol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    /// Integration step, seconds; at most 0.01.
    pub dt: f64,
    /// Add the reference acceleration to the feedback command.
    pub feedforward: bool,
    /// Saturate the x and y commands at the trajectory's `a_max`.
    pub clamp: bool,
    /// Re-refine every plan segment from the actual state at its start.
    pub rebase: bool,
    /// Wall contacts make a run fail; when off they are only reported.
    pub count_static: bool,
    /// Extra time simulated after the reference ends, seconds.
    pub settle: f64,
    /// Keep every `trace_every`-th state in the outcome; 0 keeps none.
    pub trace_every: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 1e-3,
            feedforward: false,
            clamp: false,
            rebase: false,
            count_static: false,
            settle: 1.0,
            trace_every: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt <= 0.01) {
            return Err(Error::invalid("dt", format!("{} (must be in (0, 0.01])", self.dt)));
        }
        if !(self.settle >= 0.0 && self.settle.is_finite()) {
            return Err(Error::invalid("settle", format!("{} (must be non-negative)", self.settle)));
        }
        Ok(())
    }
}

/// What the robot touched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Contact {
    Static,
    Obstacle(usize),
}

/// First step of one contact episode, with the smallest clearance margin
/// (negative penetration depth) reached during it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollisionEvent {
    pub t: f64,
    pub with: Contact,
    pub depth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub state: RobotState,
    pub u: [f64; 3],
    /// Clearance to the nearest obstacle disk boundary, `∞` without obstacles.
    pub min_obstacle_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub success: bool,
    /// Contact episodes that make the run fail.
    pub collisions: Vec<CollisionEvent>,
    /// Wall contacts when they do not count as failures.
    pub static_contacts: Vec<CollisionEvent>,
    pub rmse1: f64,
    pub rmse2: f64,
    /// End of the tracked reference, seconds.
    pub arrival_time: f64,
    /// Distance from the goal when the simulation stopped.
    pub final_error: f64,
    /// Smallest center distance to any obstacle minus the contact distance.
    pub min_dynamic_margin: f64,
    pub overrun: f64,
    pub config: SimConfig,
    pub gains: ControlGains,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
    #[serde(skip)]
    pub reference: Option<ReferenceTrajectory>,
}

impl SimOutcome {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn trace_csv(&self) -> String {
        let mut out = String::from("t,x,y,theta,vx,vy,omega,ux,uy,utheta,min_obstacle_distance\n");
        for row in &self.trace {
            let s = row.state;
            let _ = writeln!(
                out,
                "{:.6},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9},{:.9}",
                s.t, s.x, s.y, s.theta, s.vx, s.vy, s.omega, row.u[0], row.u[1], row.u[2], row.min_obstacle_distance
            );
        }
        out
    }
}

/// Position RMSE of `trace` against the plan (first) and the reference
/// (second), over the samples given. Headings are ignored.
pub fn rmse_metrics(trace: &[RobotState], plan: &Plan, reference: &ReferenceTrajectory) -> (f64, f64) {
    if trace.is_empty() {
        return (0.0, 0.0);
    }
    let (mut s1, mut s2) = (0.0, 0.0);
    for st in trace {
        let p = st.position();
        s1 += p.distance(plan.position_at(st.t)).powi(2);
        s2 += p.distance(reference.sample(st.t).position()).powi(2);
    }
    let n = trace.len() as f64;
    ((s1 / n).sqrt(), (s2 / n).sqrt())
}
