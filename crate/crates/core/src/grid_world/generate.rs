use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::grid_world::{Cell, Configuration, DynamicObstacle, GridMap, Instance, RobotParams, Waypoint};
use crate::safe_intervals::{disk_collision_interval, LinearMotion};

const CARDINALS: [(i32, i32); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];

/// Knobs of the random instance generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GenOptions {
    /// Obstacles stop moving after this many seconds; `None` picks
    /// `1.5·(width + height)·l / speed`.
    pub horizon: Option<f64>,
    /// Obstacle translation speed, m/s.
    pub speed: f64,
    /// Chance that an obstacle waits one step instead of moving.
    pub wait_probability: f64,
    /// Chance that a moving obstacle keeps its previous heading when it can.
    pub straight_probability: f64,
    /// Minimum straight-line start-goal distance, meters.
    pub min_start_goal_distance: f64,
    /// Chebyshev radius (cells) around the start kept free of obstacles at
    /// `t = 0`, and around the goal kept free of parked obstacles.
    pub keep_out: i32,
    /// Chebyshev radius (cells) around the goal that obstacles never enter;
    /// negative disables it.
    pub goal_keep_out: i32,
    /// Restarts allowed per obstacle before giving up.
    pub max_retries: usize,
}

impl Default for GenOptions {
    fn default() -> Self {
        GenOptions {
            horizon: None,
            speed: 1.0,
            wait_probability: 0.2,
            straight_probability: 0.0,
            min_start_goal_distance: 0.0,
            keep_out: 2,
            goal_keep_out: 1,
            max_retries: 100,
        }
    }
}

impl GenOptions {
    pub fn validate(&self) -> Result<()> {
        let unit = 0.0..=1.0;
        if !unit.contains(&self.wait_probability) || !unit.contains(&self.straight_probability) {
            return Err(Error::invalid("generator", "probabilities must lie in [0, 1]"));
        }
        if !(self.speed > 0.0 && self.speed.is_finite()) {
            return Err(Error::invalid("generator", "speed must be positive"));
        }
        if self.horizon.is_some_and(|h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::invalid("generator", "horizon must be positive"));
        }
        Ok(())
    }
}

/// Random instance with `n_obstacles` obstacles doing cell-to-cell random
/// walks; identical arguments give identical instances.
pub fn generate_instance(map: &GridMap, n_obstacles: usize, seed: u64) -> Result<Instance> {
    generate_instance_with(map, n_obstacles, seed, &GenOptions::default())
}

pub fn generate_instance_with(
    map: &GridMap,
    n_obstacles: usize,
    seed: u64,
    opts: &GenOptions,
) -> Result<Instance> {
    opts.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let free: Vec<Cell> = map.free_cells().collect();
    if free.len() < n_obstacles + 2 {
        return Err(Error::Generation(format!(
            "{} free cells cannot host {} obstacles plus start and goal",
            free.len(),
            n_obstacles
        )));
    }
    let robot = RobotParams::for_cell_size(map.cell_size());

    let start = *free.choose(&mut rng).expect("non-empty");
    let goal = (0..10_000)
        .map(|_| *free.choose(&mut rng).expect("non-empty"))
        .find(|&g| {
            g != start
                && map.cell_center(g).distance(map.cell_center(start)) >= opts.min_start_goal_distance
        })
        .ok_or_else(|| Error::Generation("no goal far enough from the start".into()))?;

    let step = map.cell_size() / opts.speed;
    let horizon = opts
        .horizon
        .unwrap_or(1.5 * (map.width() + map.height()) as f64 * map.cell_size() / opts.speed);
    let slots = (horizon / step).ceil().max(1.0) as usize;
    let clearance = 2.0 * robot.radius;

    let mut walks: Vec<Vec<Cell>> = Vec::with_capacity(n_obstacles);
    for k in 0..n_obstacles {
        let mut placed = None;
        for _ in 0..opts.max_retries {
            if let Some(w) = random_walk(map, &free, &walks, start, goal, slots, step, clearance, opts, &mut rng) {
                placed = Some(w);
                break;
            }
        }
        let walk = placed.ok_or_else(|| {
            Error::Generation(format!(
                "obstacle {k}: no collision-free schedule after {} attempts",
                opts.max_retries
            ))
        })?;
        walks.push(walk);
    }

    let obstacles = walks
        .iter()
        .map(|walk| DynamicObstacle::new(robot.radius, compress(map, walk, step)))
        .collect::<Result<Vec<_>>>()?;
    let heading = rng.gen_range(0..4) as f64 * std::f64::consts::FRAC_PI_2;
    Instance::new(
        map.clone(),
        obstacles,
        Configuration::new(map.cell_center(start), heading),
        map.cell_center(goal),
        robot,
    )
}

fn chebyshev(a: Cell, b: Cell) -> i32 {
    (a.x - b.x).abs().max((a.y - b.y).abs())
}

#[allow(clippy::too_many_arguments)]
fn random_walk(
    map: &GridMap,
    free: &[Cell],
    others: &[Vec<Cell>],
    start: Cell,
    goal: Cell,
    slots: usize,
    step: f64,
    clearance: f64,
    opts: &GenOptions,
    rng: &mut ChaCha8Rng,
) -> Option<Vec<Cell>> {
    let first = *free.choose(rng)?;
    if chebyshev(first, start) <= opts.keep_out || chebyshev(first, goal) <= opts.goal_keep_out || others.iter().any(|w| w[0] == first) {
        return None;
    }
    let mut walk = Vec::with_capacity(slots + 1);
    walk.push(first);
    for slot in 0..slots {
        let here = walk[slot];
        let mut options: Vec<Cell> = CARDINALS
            .iter()
            .map(|&(dx, dy)| here.offset(dx, dy))
            .filter(|&c| map.is_free(c) && chebyshev(c, goal) > opts.goal_keep_out)
            .collect();
        options.shuffle(rng);
        if slot > 0 && walk[slot - 1] != here && rng.gen_bool(opts.straight_probability) {
            let ahead = here.offset(here.x - walk[slot - 1].x, here.y - walk[slot - 1].y);
            if let Some(i) = options.iter().position(|&c| c == ahead) {
                let c = options.remove(i);
                options.insert(0, c);
            }
        }
        if rng.gen_bool(opts.wait_probability) {
            options.insert(0, here);
        } else {
            options.push(here);
        }
        let last = slot + 1 == slots;
        let t0 = slot as f64 * step;
        let next = options.into_iter().find(|&next| {
            if last && chebyshev(next, goal) <= opts.keep_out {
                return false;
            }
            let mine = LinearMotion::between(map.cell_center(here), t0, map.cell_center(next), t0 + step);
            others.iter().all(|w| {
                let (a, b) = (w[slot], w[slot + 1]);
                if chebyshev(a, here) > 3 {
                    return true;
                }
                let theirs = LinearMotion::between(map.cell_center(a), t0, map.cell_center(b), t0 + step);
                disk_collision_interval(&mine, &theirs, clearance).is_none()
            })
        })?;
        walk.push(next);
    }
    Some(walk)
}

/// Slot-by-slot cells to waypoints, dropping the interior of waits and any
/// trailing rest.
fn compress(map: &GridMap, walk: &[Cell], step: f64) -> Vec<Waypoint> {
    let mut keep = vec![true; walk.len()];
    for i in 1..walk.len() {
        let same_prev = walk[i] == walk[i - 1];
        let same_next = i + 1 < walk.len() && walk[i + 1] == walk[i];
        if same_prev && (same_next || i + 1 == walk.len()) {
            keep[i] = false;
        }
    }
    walk.iter()
        .enumerate()
        .filter(|(i, _)| keep[*i])
        .map(|(i, &c)| {
            let p: Point2 = map.cell_center(c);
            Waypoint::new(p, i as f64 * step)
        })
        .collect()
}
