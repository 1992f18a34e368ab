use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use crate::geometry::normalize_angle;
use crate::grid_world::{Cell, Instance};
use crate::safe_intervals::{ObstacleIndex, SafeInterval, SafeIntervalTable};

use super::plan::{ActionKind, Mode, Plan, PlanAction, Pose};
use super::{dur_rot, heuristic};

const CARDINAL: [(i32, i32); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];
const OCTILE: [(i32, i32); 8] = [(1, 0), (1, 1), (0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1)];

/// Slack in the dominance comparisons of the duplicate check.
const G_EPS: f64 = 1e-9;

#[derive(Debug, Clone)]
struct Node {
    cell: Cell,
    cell_id: usize,
    interval: usize,
    theta: f64,
    g: f64,
    parent: Option<usize>,
    in_open: bool,
}

#[derive(Debug, Clone, Copy)]
struct OpenEntry {
    f: f64,
    g: f64,
    cell_id: usize,
    node: usize,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenEntry {
    /// Max-heap order: lowest f, then highest g, then lowest cell id, then
    /// oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then(self.g.total_cmp(&other.g))
            .then(other.cell_id.cmp(&self.cell_id))
            .then(other.node.cmp(&self.node))
    }
}

/// Counters from one search run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub expansions: usize,
    pub generated: usize,
    pub pruned: usize,
}

pub(crate) struct Search<'a> {
    pub inst: &'a Instance,
    pub timelines: &'a SafeIntervalTable,
    pub index: &'a ObstacleIndex,
    pub mode: Mode,
    pub inflation: f64,
    pub v_max: f64,
    pub omega_max: f64,
}

struct Successor {
    cell: Cell,
    cell_id: usize,
    interval: usize,
    theta: f64,
    g: f64,
}

impl Search<'_> {
    pub fn run(&self) -> (Option<Plan>, SearchStats) {
        let mut stats = SearchStats::default();
        let map = &self.inst.map;
        let start_cell = self.inst.start_cell();
        let goal_cell = self.inst.goal_cell();
        let goal_pos = self.inst.goal;
        let (Some(start_id), Some(goal_id)) = (map.cell_id(start_cell), map.cell_id(goal_cell)) else {
            return (None, stats);
        };
        let Some(start_iv) = self.timelines.interval_at(start_id, 0.0) else {
            return (None, stats);
        };

        let mut nodes: Vec<Node> = Vec::new();
        let mut visited: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        let mut open = BinaryHeap::new();

        nodes.push(Node {
            cell: start_cell,
            cell_id: start_id,
            interval: start_iv,
            theta: self.inst.start.heading,
            g: 0.0,
            parent: None,
            in_open: true,
        });
        visited.insert((start_id, start_iv), vec![0]);
        open.push(OpenEntry {
            f: heuristic(self.inst.start.pos, goal_pos, self.v_max),
            g: 0.0,
            cell_id: start_id,
            node: 0,
        });

        let neighbors: &[(i32, i32)] = if self.mode.any_angle() { &OCTILE } else { &CARDINAL };
        let mut successors = Vec::new();

        while let Some(entry) = open.pop() {
            let s = entry.node;
            if !nodes[s].in_open {
                continue;
            }
            nodes[s].in_open = false;
            stats.expansions += 1;

            let cur = nodes[s].clone();
            if cur.cell_id == goal_id && self.timelines.intervals(goal_id)[cur.interval].is_unbounded() {
                return (Some(self.reconstruct(&nodes, s)), stats);
            }

            for &(dx, dy) in neighbors {
                let target = cur.cell.offset(dx, dy);
                if map.is_blocked(target) {
                    continue;
                }
                successors.clear();
                let here = map.cell_center(cur.cell);
                let there = map.cell_center(target);
                if !self.mode.any_angle() || map.line_of_sight_clear(here, there, self.inst.robot.radius) {
                    self.successors_from(&cur, target, &mut successors);
                }
                if self.mode.any_angle() {
                    if let Some(p) = cur.parent {
                        let parent = &nodes[p];
                        if parent.cell != target
                            && map.line_of_sight_clear(
                                map.cell_center(parent.cell),
                                there,
                                self.inst.robot.radius,
                            )
                        {
                            let from = successors.len();
                            self.successors_from(parent, target, &mut successors);
                            for succ in &mut successors[from..] {
                                succ.1 = Some(p);
                            }
                        }
                    }
                }

                for (succ, via) in successors.drain(..) {
                    stats.generated += 1;
                    let parent = via.unwrap_or(s);
                    let key = (succ.cell_id, succ.interval);
                    let mut add = true;
                    if let Some(list) = visited.get(&key) {
                        for &other in list {
                            let o = &nodes[other];
                            let rot = self.dominance_rotation(succ.theta, o.theta);
                            if succ.g >= o.g + rot - G_EPS {
                                add = false;
                            } else if o.g > succ.g + rot + G_EPS && o.in_open {
                                nodes[other].in_open = false;
                            }
                        }
                    }
                    if !add {
                        stats.pruned += 1;
                        continue;
                    }
                    let id = nodes.len();
                    let h = heuristic(map.cell_center(succ.cell), goal_pos, self.v_max);
                    nodes.push(Node {
                        cell: succ.cell,
                        cell_id: succ.cell_id,
                        interval: succ.interval,
                        theta: succ.theta,
                        g: succ.g,
                        parent: Some(parent),
                        in_open: true,
                    });
                    visited.entry(key).or_default().push(id);
                    open.push(OpenEntry { f: succ.g + h, g: succ.g, cell_id: succ.cell_id, node: id });
                }
            }
        }
        (None, stats)
    }

    fn dominance_rotation(&self, a: f64, b: f64) -> f64 {
        if self.mode.rotations() {
            dur_rot(a, b, self.omega_max)
        } else {
            0.0
        }
    }

    /// Heading while moving `from`→`to`. Headings only matter with
    /// rotations; otherwise the start heading is carried along.
    fn move_heading(&self, from: &Node, to: Cell) -> f64 {
        if !self.mode.rotations() {
            return from.theta;
        }
        let (dx, dy) = (to.x - from.cell.x, to.y - from.cell.y);
        normalize_angle((dy as f64).atan2(dx as f64))
    }

    /// States reachable by moving straight from `from` to `target`, one per
    /// safe interval of `target` that can be entered.
    fn successors_from(&self, from: &Node, target: Cell, out: &mut Vec<(Successor, Option<usize>)>) {
        let map = &self.inst.map;
        let Some(target_id) = map.cell_id(target) else { return };
        let a = map.cell_center(from.cell);
        let b = map.cell_center(target);
        let duration = a.distance(b) / self.v_max;
        let theta = self.move_heading(from, target);
        let rotation = if self.mode.rotations() {
            dur_rot(from.theta, theta, self.omega_max)
        } else {
            0.0
        };
        let source = self.timelines.intervals(from.cell_id)[from.interval];
        let earliest = from.g + rotation;
        if earliest > source.end {
            return;
        }
        let window = SafeInterval { begin: earliest, end: source.end };
        let mut conflicts = self.index.departure_conflicts(a, b, self.v_max, earliest, source.end);
        for (j, iv) in self.timelines.intervals(target_id).iter().enumerate() {
            if iv.end < earliest + duration {
                continue;
            }
            if iv.begin > source.end + duration {
                break;
            }
            let Some(t_dep) = ObstacleIndex::earliest_with_conflicts(&mut conflicts, duration, window, *iv)
            else {
                continue;
            };
            out.push((
                Successor { cell: target, cell_id: target_id, interval: j, theta, g: t_dep + duration },
                None,
            ));
        }
    }

    fn reconstruct(&self, nodes: &[Node], goal: usize) -> Plan {
        let map = &self.inst.map;
        let mut chain = vec![goal];
        while let Some(p) = nodes[*chain.last().expect("non-empty")].parent {
            chain.push(p);
        }
        chain.reverse();

        let start = Pose::new(self.inst.start.pos, self.inst.start.heading);
        let mut actions = Vec::new();
        let mut push = |kind, from: Pose, to: Pose, t0: f64, t1: f64| {
            if t1 - t0 > 1e-9 {
                actions.push(PlanAction { kind, start: from, end: to, t_start: t0, t_end: t1 });
            }
        };
        let mut pose = start;
        let mut t = 0.0;
        for pair in chain.windows(2) {
            let (p, c) = (&nodes[pair[0]], &nodes[pair[1]]);
            let a = map.cell_center(p.cell);
            let b = map.cell_center(c.cell);
            let duration = a.distance(b) / self.v_max;
            let depart = (c.g - duration).max(t);
            let rotation = if self.mode.rotations() {
                dur_rot(pose.theta, c.theta, self.omega_max)
            } else {
                0.0
            };
            let turn_at = (depart - rotation).max(t);
            push(ActionKind::Wait, pose, pose, t, turn_at);
            let turned = Pose::new(pose.pos(), c.theta);
            push(ActionKind::Rotate, pose, turned, turn_at, depart);
            let arrived = Pose::new(b, c.theta);
            push(ActionKind::Translate, turned, arrived, depart, c.g);
            pose = arrived;
            t = c.g;
        }
        // Sub-nanosecond pieces were dropped above; close the gaps they leave.
        let mut cursor = 0.0;
        for a in &mut actions {
            a.t_start = cursor;
            cursor = a.t_end;
        }
        let arrival = actions.last().map_or(0.0, |a| a.t_end);
        Plan { mode: self.mode, inflation: self.inflation, arrival_time: arrival, start, actions }
    }
}
