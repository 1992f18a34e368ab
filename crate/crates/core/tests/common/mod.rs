#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use timed_nav::grid_world::{generate_instance_with, Cell, GenOptions, GridMap, Instance};
use timed_nav::planner::Plan;
use timed_nav::Point2;

/// Slack for floating-point noise in sampled distance checks.
pub const AUDIT_TOL: f64 = 1e-6;

/// Distance from `p` to the nearest blocked cell or the map border, by brute
/// force over every cell.
pub fn brute_static_clearance(map: &GridMap, p: Point2) -> f64 {
    let l = map.cell_size();
    let (w, h) = (map.width() as f64 * l, map.height() as f64 * l);
    let mut best = p.x.min(w - p.x).min(p.y).min(h - p.y);
    if best < 0.0 {
        return 0.0;
    }
    for y in 0..map.height() {
        for x in 0..map.width() {
            let c = Cell::new(x as i32, y as i32);
            if map.is_free(c) {
                continue;
            }
            let (x0, y0) = (x as f64 * l, y as f64 * l);
            let dx = (x0 - p.x).max(0.0).max(p.x - x0 - l);
            let dy = (y0 - p.y).max(0.0).max(p.y - y0 - l);
            best = best.min(dx.hypot(dy));
        }
    }
    best
}

/// Same as [`brute_static_clearance`] but only looks at the 5×5 block of
/// cells around `p`; enough for a unit-radius check on unit cells.
fn local_static_clearance(map: &GridMap, p: Point2) -> f64 {
    let l = map.cell_size();
    let (w, h) = (map.width() as f64 * l, map.height() as f64 * l);
    let mut best = p.x.min(w - p.x).min(p.y).min(h - p.y);
    let (cx, cy) = ((p.x / l).floor() as i32, (p.y / l).floor() as i32);
    for y in cy - 2..=cy + 2 {
        for x in cx - 2..=cx + 2 {
            let c = Cell::new(x, y);
            if !map.in_bounds(c) || map.is_free(c) {
                continue;
            }
            let (x0, y0) = (x as f64 * l, y as f64 * l);
            let dx = (x0 - p.x).max(0.0).max(p.x - x0 - l);
            let dy = (y0 - p.y).max(0.0).max(p.y - y0 - l);
            best = best.min(dx.hypot(dy));
        }
    }
    best
}

/// Audits `plan` every millisecond from 0 to one second past arrival:
/// static clearance ≥ r and dynamic clearance ≥ 2r + δ.
pub fn audit_plan(plan: &Plan, inst: &Instance) -> Result<(), String> {
    plan.validate().map_err(|e| e.to_string())?;
    let r = inst.robot.radius;
    let start = inst.start.pos;
    if plan.start.pos().distance(start) > 1e-9 {
        return Err("plan does not start at the instance start".into());
    }
    if plan.goal().pos().distance(inst.goal) > 1e-9 {
        return Err("plan does not end at the goal".into());
    }
    let end = plan.arrival_time.max(inst.schedule_horizon()) + 1.0;
    let steps = (end / 1e-3).ceil() as usize;
    for k in 0..=steps {
        let t = k as f64 * 1e-3;
        let p = plan.position_at(t);
        let s = local_static_clearance(&inst.map, p);
        if s < r - AUDIT_TOL {
            return Err(format!("static clearance {s:.6} at t = {t:.3}, p = {p:?}"));
        }
        for (i, o) in inst.obstacles.iter().enumerate() {
            let need = r + o.radius() + plan.inflation;
            let d = o.position_at(t).distance(p);
            if d < need - AUDIT_TOL {
                return Err(format!("obstacle {i} at distance {d:.6} < {need} at t = {t:.3}"));
            }
        }
    }
    Ok(())
}

/// Random map with roughly `density` blocked cells.
pub fn random_map(width: usize, height: usize, density: f64, rng: &mut ChaCha8Rng) -> GridMap {
    let blocked = (0..width * height).map(|_| rng.gen_bool(density)).collect();
    GridMap::from_blocked(width, height, 1.0, blocked).unwrap()
}

/// Small random instance, or `None` when the generator cannot place it.
pub fn small_instance(seed: u64, size: usize, max_obstacles: usize, horizon: f64) -> Option<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let map = random_map(size, size, 0.15, &mut rng);
    let n = rng.gen_range(0..=max_obstacles);
    let opts = GenOptions { horizon: Some(horizon), keep_out: 1, ..GenOptions::default() };
    generate_instance_with(&map, n, seed, &opts).ok()
}

/// Earliest arrival of a cardinal-move, time-expanded search with time step
/// `dt`; moves take `l / v_max`, waits take `dt`, and safety is checked by
/// sampling every millisecond. Returns `None` if the goal is unreachable
/// within `t_max`.
pub fn time_expanded_arrival(inst: &Instance, dt: f64, t_max: f64) -> Option<f64> {
    let map = &inst.map;
    let l = map.cell_size();
    let need = 2.0 * inst.robot.radius;
    let move_steps = (l / inst.robot.v_max / dt).round() as usize;
    let n_steps = (t_max / dt).ceil() as usize;
    let sub = (dt / 1e-3).round() as usize;
    let safe_at = |p: Point2, t: f64| inst.obstacles.iter().all(|o| o.position_at(t).distance(p) >= need - 1e-9);

    let cells: Vec<Cell> = map.free_cells().collect();
    let id = |c: Cell| cells.iter().position(|&d| d == c);
    let n = cells.len();

    // wait_ok[k][i]: staying at cell i over [k·dt, (k+1)·dt] is safe.
    let wait_ok: Vec<Vec<bool>> = (0..n_steps)
        .map(|k| {
            cells
                .iter()
                .map(|&c| {
                    let p = map.cell_center(c);
                    (0..=sub).all(|j| safe_at(p, (k * sub + j) as f64 * 1e-3))
                })
                .collect()
        })
        .collect();

    let goal_id = id(map.cell_at(inst.goal))?;
    let goal_p = inst.goal;
    let horizon = inst.schedule_horizon();
    // Goal must stay safe from arrival on; obstacles rest after `horizon`.
    let last_unsafe = {
        let mut last = f64::NEG_INFINITY;
        let m = ((horizon + 1.0) / 1e-3).ceil() as usize;
        for j in 0..=m {
            let t = j as f64 * 1e-3;
            if !safe_at(goal_p, t) {
                last = t;
            }
        }
        last
    };

    let neighbors: Vec<Vec<usize>> = cells
        .iter()
        .map(|&c| {
            [(1, 0), (-1, 0), (0, 1), (0, -1)]
                .iter()
                .filter_map(|&(dx, dy)| {
                    let d = c.offset(dx, dy);
                    if map.in_bounds(d) && map.is_free(d) {
                        id(d)
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect();

    let start_id = id(map.cell_at(inst.start.pos))?;
    let mut reach = vec![vec![false; n]; n_steps + 1];
    reach[0][start_id] = true;
    for k in 0..=n_steps {
        if reach[k][goal_id] && k as f64 * dt > last_unsafe {
            return Some(k as f64 * dt);
        }
        if k == n_steps {
            break;
        }
        for i in 0..n {
            if !reach[k][i] {
                continue;
            }
            if wait_ok[k][i] {
                reach[k + 1][i] = true;
            }
            if k + move_steps > n_steps {
                continue;
            }
            let a = map.cell_center(cells[i]);
            for &j in &neighbors[i] {
                if reach[k + move_steps][j] {
                    continue;
                }
                let b = map.cell_center(cells[j]);
                let total = move_steps * sub;
                let t0 = k as f64 * dt;
                // Relative speed is at most 2 m/s over a one-second move.
                let near: Vec<_> = inst
                    .obstacles
                    .iter()
                    .filter(|o| o.position_at(t0).distance(a) < need + 2.0 * l + 1e-6)
                    .collect();
                let ok = (0..=total).all(|s| {
                    let f = s as f64 / total as f64;
                    let t = (k * sub + s) as f64 * 1e-3;
                    let p = a + (b - a) * f;
                    near.iter().all(|o| o.position_at(t).distance(p) >= need - 1e-9)
                });
                if ok {
                    reach[k + move_steps][j] = true;
                }
            }
        }
    }
    None
}
