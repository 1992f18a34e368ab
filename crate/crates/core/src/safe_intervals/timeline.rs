use crate::geometry::Point2;
use crate::grid_world::{Cell, DynamicObstacle, GridMap};

use super::{disk_collision_interval, dynamic_clearance, LinearMotion, SafeInterval, MIN_INTERVAL};

/// Safe intervals of a robot resting at one cell center.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTimeline {
    pub cell: Cell,
    pub intervals: Vec<SafeInterval>,
}

/// Safe intervals for every cell of a map, indexed by cell id. Blocked cells
/// have no intervals.
#[derive(Debug, Clone)]
pub struct SafeIntervalTable {
    width: usize,
    intervals: Vec<Vec<SafeInterval>>,
    collisions: Vec<Vec<(f64, f64)>>,
}

impl SafeIntervalTable {
    pub fn intervals(&self, cell_id: usize) -> &[SafeInterval] {
        &self.intervals[cell_id]
    }

    /// Merged collision intervals of a cell (the complement of its safe
    /// intervals before short gaps are discarded).
    pub fn collision_intervals(&self, cell_id: usize) -> &[(f64, f64)] {
        &self.collisions[cell_id]
    }

    /// Index of the safe interval containing `t`.
    pub fn interval_at(&self, cell_id: usize, t: f64) -> Option<usize> {
        let ivs = &self.intervals[cell_id];
        let idx = ivs.partition_point(|iv| iv.begin <= t);
        (idx > 0 && ivs[idx - 1].contains(t)).then(|| idx - 1)
    }

    pub fn timeline(&self, cell_id: usize) -> CellTimeline {
        CellTimeline {
            cell: Cell::new((cell_id % self.width) as i32, (cell_id / self.width) as i32),
            intervals: self.intervals[cell_id].clone(),
        }
    }

    /// Timelines of all free cells.
    pub fn timelines<'a>(&'a self, map: &'a GridMap) -> impl Iterator<Item = CellTimeline> + 'a {
        map.free_cells().map(move |c| self.timeline(map.cell_id(c).expect("in bounds")))
    }
}

/// For every free cell center, treated as a robot of `robot_radius` resting
/// there over `[0, ∞)`, removes from `[0, ∞)` every instant at which some
/// obstacle is closer than `2r + inflation`.
pub fn build_cell_timelines(
    map: &GridMap,
    obstacles: &[DynamicObstacle],
    robot_radius: f64,
    inflation: f64,
) -> SafeIntervalTable {
    let n = map.num_cells();
    let mut collisions: Vec<Vec<(f64, f64)>> = vec![Vec::new(); n];
    for obs in obstacles {
        let clearance = dynamic_clearance(robot_radius, obs.radius(), inflation);
        for seg in obs.segments() {
            let (p0, p1) = (seg.origin, seg.end_position());
            let lo = Point2::new(p0.x.min(p1.x) - clearance, p0.y.min(p1.y) - clearance);
            let hi = Point2::new(p0.x.max(p1.x) + clearance, p0.y.max(p1.y) + clearance);
            for cell in map.cells_overlapping(lo, hi) {
                let Some(id) = map.cell_id(cell) else { continue };
                if map.is_blocked(cell) {
                    continue;
                }
                let rest = LinearMotion::stationary(map.cell_center(cell), 0.0, f64::INFINITY);
                if let Some(iv) = disk_collision_interval(&rest, &seg, clearance) {
                    collisions[id].push(iv);
                }
            }
        }
    }

    let mut intervals = vec![Vec::new(); n];
    for id in 0..n {
        if map.is_blocked(map.cell_of_id(id)) {
            collisions[id].clear();
            continue;
        }
        let merged = merge_open_intervals(std::mem::take(&mut collisions[id]));
        intervals[id] = complement(&merged);
        collisions[id] = merged;
    }
    SafeIntervalTable { width: map.width(), intervals, collisions }
}

fn merge_open_intervals(mut ivs: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    ivs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(ivs.len());
    for (lo, hi) in ivs {
        match out.last_mut() {
            Some(last) if lo < last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// `[0, ∞)` minus the union of the sorted disjoint open intervals, dropping
/// pieces shorter than [`MIN_INTERVAL`].
fn complement(collisions: &[(f64, f64)]) -> Vec<SafeInterval> {
    let mut out = Vec::new();
    let mut cursor = 0.0_f64;
    for &(lo, hi) in collisions {
        if lo - cursor >= MIN_INTERVAL {
            out.push(SafeInterval::new(cursor, lo));
        }
        cursor = cursor.max(hi);
    }
    if cursor.is_finite() {
        out.push(SafeInterval::new(cursor, f64::INFINITY));
    }
    out
}
