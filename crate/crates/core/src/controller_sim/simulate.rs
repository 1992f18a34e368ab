use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::grid_world::Instance;
use crate::planner::{Plan, Pose};
use crate::refiner::{check_bounds, refine_plan, ReferenceTrajectory};

use super::{control, CollisionEvent, Contact, ControlGains, RobotState, SimConfig, SimOutcome, TraceRow};

/// Contact tolerance of the audit, meters.
const AUDIT_EPS: f64 = 1e-9;
/// Assumed bound on robot speed when skipping far obstacles, m/s.
const SPEED_CAP: f64 = 10.0;

/// Refines `plan` with acceleration bound `a_max` and the instance's speed
/// limit, then tracks it. With `config.rebase` each segment is refined from
/// the state the robot actually reached when the segment starts.
pub fn simulate(
    plan: &Plan,
    instance: &Instance,
    a_max: f64,
    gains: ControlGains,
    config: &SimConfig,
) -> Result<SimOutcome> {
    let v_max = instance.robot.v_max;
    if config.rebase {
        check_bounds(a_max, v_max)?;
        plan.validate()?;
        Runner::new(instance, plan, gains, config, ReferenceTrajectory::new(a_max, v_max), true)?.run()
    } else {
        let reference = refine_plan(plan, a_max, v_max)?;
        Runner::new(instance, plan, gains, config, reference, false)?.run()
    }
}

/// Tracks a fixed, precomputed reference; `plan` is only the baseline for
/// the first RMSE.
pub fn simulate_reference(
    reference: &ReferenceTrajectory,
    plan: &Plan,
    instance: &Instance,
    gains: ControlGains,
    config: &SimConfig,
) -> Result<SimOutcome> {
    Runner::new(instance, plan, gains, config, reference.clone(), false)?.run()
}

struct Runner<'a> {
    inst: &'a Instance,
    plan: &'a Plan,
    gains: ControlGains,
    config: SimConfig,
    traj: ReferenceTrajectory,
    rebase: bool,
    next_action: usize,
    next_check: Vec<f64>,
    in_contact: Vec<Option<usize>>,
    static_episode: Option<usize>,
    events: Vec<CollisionEvent>,
    min_margin: f64,
}

impl<'a> Runner<'a> {
    fn new(
        inst: &'a Instance,
        plan: &'a Plan,
        gains: ControlGains,
        config: &SimConfig,
        traj: ReferenceTrajectory,
        rebase: bool,
    ) -> Result<Self> {
        config.validate()?;
        ControlGains::new(gains.lambda1, gains.lambda2)?;
        let n = inst.obstacles.len();
        Ok(Runner {
            inst,
            plan,
            gains,
            config: *config,
            traj,
            rebase,
            next_action: 0,
            next_check: vec![0.0; n],
            in_contact: vec![None; n],
            static_episode: None,
            events: Vec::new(),
            min_margin: f64::INFINITY,
        })
    }

    fn actions_left(&self) -> bool {
        self.rebase && self.next_action < self.plan.actions.len()
    }

    fn run(mut self) -> Result<SimOutcome> {
        let start = self.plan.start;
        let mut state = RobotState::at_rest(start.x, start.y, start.theta);
        let mut trace = Vec::new();
        let (mut sq1, mut sq2, mut samples) = (0.0, 0.0, 0usize);
        let mut step = 0usize;

        loop {
            if self.actions_left() && state.t >= self.traj.end_time() - 1e-12 {
                let action = self.plan.actions[self.next_action];
                let from = Pose { x: state.x, y: state.y, theta: state.theta };
                let t0 = self.traj.end_time();
                self.traj.push_segment(&action, from, t0);
                self.next_action += 1;
                continue;
            }

            let u = self.command(&state, state.t);
            self.audit(&state);
            if state.t <= self.traj.end_time() + 1e-12 {
                let p = state.position();
                sq1 += p.distance(self.plan.position_at(state.t)).powi(2);
                sq2 += p.distance(self.traj.sample(state.t).position()).powi(2);
                samples += 1;
            }
            if self.config.trace_every > 0 && step.is_multiple_of(self.config.trace_every) {
                trace.push(TraceRow { state, u, min_obstacle_distance: self.nearest_obstacle(&state) });
            }

            let horizon = if self.actions_left() {
                self.traj.end_time()
            } else {
                self.traj.end_time() + self.config.settle
            };
            if !self.actions_left() && state.t >= horizon - 1e-12 {
                break;
            }
            let boundary = self.next_boundary(state.t).min(horizon);
            let h = self.config.dt.min(boundary - state.t);
            state = self.rk4(&state, h);
            if !state.is_finite() {
                return Err(Error::NonFinite { t: state.t, msg: format!("state diverged: {state:?}") });
            }
            step += 1;
        }

        let n = samples.max(1) as f64;
        let (collisions, static_contacts) = if self.config.count_static {
            (self.events, Vec::new())
        } else {
            self.events.into_iter().partition(|e| e.with != Contact::Static)
        };
        Ok(SimOutcome {
            success: collisions.is_empty(),
            collisions,
            static_contacts,
            rmse1: (sq1 / n).sqrt(),
            rmse2: (sq2 / n).sqrt(),
            arrival_time: self.traj.end_time(),
            final_error: state.position().distance(self.plan.goal().pos()),
            min_dynamic_margin: self.min_margin,
            overrun: self.traj.overrun(),
            config: self.config,
            gains: self.gains,
            trace,
            reference: Some(self.traj),
        })
    }

    /// Next reference segment boundary strictly after `t`.
    fn next_boundary(&self, t: f64) -> f64 {
        let segs = &self.traj.segments;
        let i = segs.partition_point(|s| s.t_end <= t + 1e-12);
        segs.get(i).map_or(f64::INFINITY, |s| s.t_end)
    }

    fn command(&self, s: &RobotState, t: f64) -> [f64; 3] {
        let r = self.traj.sample(t);
        let coords = s.coords();
        let mut u = [0.0; 3];
        for c in 0..3 {
            u[c] = control(coords[c].0, coords[c].1, r.pos[c], r.vel[c], self.gains);
            if self.config.feedforward {
                u[c] += r.acc[c];
            }
            if self.config.clamp && c < 2 {
                u[c] = u[c].clamp(-self.traj.a_max, self.traj.a_max);
            }
        }
        u
    }

    fn rk4(&self, s: &RobotState, h: f64) -> RobotState {
        let t = s.t;
        let q0 = s.coords();
        let deriv = |q: [(f64, f64); 3], t: f64| {
            let mut tmp = *s;
            tmp.set_coords(q);
            let u = self.command(&tmp, t);
            [(q[0].1, u[0]), (q[1].1, u[1]), (q[2].1, u[2])]
        };
        let add = |q: [(f64, f64); 3], k: [(f64, f64); 3], f: f64| {
            let mut out = q;
            for c in 0..3 {
                out[c].0 += f * k[c].0;
                out[c].1 += f * k[c].1;
            }
            out
        };
        let k1 = deriv(q0, t);
        let k2 = deriv(add(q0, k1, 0.5 * h), t + 0.5 * h);
        let k3 = deriv(add(q0, k2, 0.5 * h), t + 0.5 * h);
        let k4 = deriv(add(q0, k3, h), t + h);
        let mut q = q0;
        for c in 0..3 {
            q[c].0 += h / 6.0 * (k1[c].0 + 2.0 * k2[c].0 + 2.0 * k3[c].0 + k4[c].0);
            q[c].1 += h / 6.0 * (k1[c].1 + 2.0 * k2[c].1 + 2.0 * k3[c].1 + k4[c].1);
        }
        let mut out = *s;
        out.set_coords(q);
        out.t = t + h;
        out
    }

    fn audit(&mut self, s: &RobotState) {
        let p = s.position();
        let t = s.t;
        let r = self.inst.robot.radius;

        let margin = self.inst.map.static_clearance(p, 2.0 * r) - r;
        if margin < -AUDIT_EPS {
            match self.static_episode {
                Some(k) => self.events[k].depth = self.events[k].depth.min(margin),
                None => {
                    self.static_episode = Some(self.events.len());
                    self.events.push(CollisionEvent { t, with: Contact::Static, depth: margin });
                }
            }
        } else {
            self.static_episode = None;
        }

        let speed = Point2::new(s.vx, s.vy).norm();
        for (i, obs) in self.inst.obstacles.iter().enumerate() {
            if speed <= SPEED_CAP && self.in_contact[i].is_none() && t < self.next_check[i] {
                continue;
            }
            let margin = p.distance(obs.position_at(t)) - (r + obs.radius());
            self.min_margin = self.min_margin.min(margin);
            if margin < -AUDIT_EPS {
                match self.in_contact[i] {
                    Some(k) => self.events[k].depth = self.events[k].depth.min(margin),
                    None => {
                        self.in_contact[i] = Some(self.events.len());
                        self.events.push(CollisionEvent { t, with: Contact::Obstacle(i), depth: margin });
                    }
                }
            } else {
                self.in_contact[i] = None;
                // No contact possible before the gap closes at the top speeds.
                self.next_check[i] = t + margin / (SPEED_CAP + obs.max_speed());
            }
        }
    }

    fn nearest_obstacle(&self, s: &RobotState) -> f64 {
        let r = self.inst.robot.radius;
        self.inst
            .obstacles
            .iter()
            .map(|o| s.position().distance(o.position_at(s.t)) - (r + o.radius()))
            .fold(f64::INFINITY, f64::min)
    }
}
