use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point2, Rect};

/// Slack applied to every clearance comparison against static geometry.
pub const CLEARANCE_EPS: f64 = 1e-9;

/// Integer grid coordinates. May lie outside the map; such cells are blocked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Cell { x, y }
    }

    pub fn offset(self, dx: i32, dy: i32) -> Cell {
        Cell::new(self.x + dx, self.y + dy)
    }
}

/// Static occupancy grid with square cells of side `cell_size` meters.
/// Cell `(i, j)` covers `[i·l, (i+1)·l] × [j·l, (j+1)·l]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridMap {
    width: usize,
    height: usize,
    cell_size: f64,
    blocked: Vec<bool>,
}

impl GridMap {
    /// An all-free map.
    pub fn new(width: usize, height: usize, cell_size: f64) -> Result<Self> {
        Self::from_blocked(width, height, cell_size, vec![false; width * height])
    }

    /// `blocked` is row-major with row 0 at `y = 0`.
    pub fn from_blocked(
        width: usize,
        height: usize,
        cell_size: f64,
        blocked: Vec<bool>,
    ) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid("map", format!("empty map {width}x{height}")));
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(Error::invalid("map", format!("cell size {cell_size} must be positive")));
        }
        if width > i32::MAX as usize || height > i32::MAX as usize {
            return Err(Error::invalid("map", "dimensions too large"));
        }
        if blocked.len() != width * height {
            return Err(Error::invalid(
                "map",
                format!("{} occupancy flags for {}x{} cells", blocked.len(), width, height),
            ));
        }
        Ok(GridMap { width, height, cell_size, blocked })
    }

    /// Parses the text map format: a `width height cell_size` header followed by
    /// `height` rows of `width` characters, `.` free and `@` blocked. The first
    /// row is `y = 0`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let header_line = 1;
        let (_, header) = lines
            .next()
            .ok_or(Error::Parse { line: header_line, msg: "missing header".into() })?;
        let parts: Vec<&str> = header.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::Parse {
                line: header_line,
                msg: format!("expected `width height cell_size`, got `{}`", header.trim()),
            });
        }
        let bad = |what: &str, v: &str| Error::Parse {
            line: header_line,
            msg: format!("bad {what} `{v}`"),
        };
        let width: usize = parts[0].parse().map_err(|_| bad("width", parts[0]))?;
        let height: usize = parts[1].parse().map_err(|_| bad("height", parts[1]))?;
        let cell_size: f64 = parts[2].parse().map_err(|_| bad("cell size", parts[2]))?;
        if width == 0 || height == 0 {
            return Err(Error::Parse {
                line: header_line,
                msg: format!("map dimensions must be positive, got {width}x{height}"),
            });
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(bad("cell size", parts[2]));
        }

        let mut blocked = Vec::with_capacity(width * height);
        let mut rows = 0;
        for (idx, raw) in lines {
            let row = raw.trim_end_matches('\r');
            if rows == height {
                if row.trim().is_empty() {
                    continue;
                }
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("more than {height} rows"),
                });
            }
            let n = row.chars().count();
            if n != width {
                return Err(Error::Parse {
                    line: idx + 1,
                    msg: format!("row has {n} cells, expected {width}"),
                });
            }
            for c in row.chars() {
                match c {
                    '.' => blocked.push(false),
                    '@' => blocked.push(true),
                    other => {
                        return Err(Error::Parse {
                            line: idx + 1,
                            msg: format!("illegal character `{other}`"),
                        })
                    }
                }
            }
            rows += 1;
        }
        if rows != height {
            return Err(Error::Parse {
                line: text.lines().count() + 1,
                msg: format!("found {rows} rows, expected {height}"),
            });
        }
        GridMap::from_blocked(width, height, cell_size, blocked)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * (self.height + 1) + 32);
        writeln!(out, "{} {} {}", self.width, self.height, self.cell_size).unwrap();
        for y in 0..self.height {
            for x in 0..self.width {
                out.push(if self.blocked[y * self.width + x] { '@' } else { '.' });
            }
            out.push('\n');
        }
        out
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn num_cells(&self) -> usize {
        self.width * self.height
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && (c.x as usize) < self.width && (c.y as usize) < self.height
    }

    /// Row-major index; `None` outside the map.
    pub fn cell_id(&self, c: Cell) -> Option<usize> {
        self.in_bounds(c).then(|| c.y as usize * self.width + c.x as usize)
    }

    pub fn cell_of_id(&self, id: usize) -> Cell {
        Cell::new((id % self.width) as i32, (id / self.width) as i32)
    }

    /// Out-of-bounds cells report blocked.
    pub fn is_blocked(&self, c: Cell) -> bool {
        match self.cell_id(c) {
            Some(id) => self.blocked[id],
            None => true,
        }
    }

    pub fn is_free(&self, c: Cell) -> bool {
        !self.is_blocked(c)
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.num_cells())
            .filter(|&id| !self.blocked[id])
            .map(|id| self.cell_of_id(id))
    }

    pub fn num_free(&self) -> usize {
        self.blocked.iter().filter(|b| !**b).count()
    }

    pub fn cell_center(&self, c: Cell) -> Point2 {
        Point2::new(
            (c.x as f64 + 0.5) * self.cell_size,
            (c.y as f64 + 0.5) * self.cell_size,
        )
    }

    /// The cell containing `p` (lower-left convention on shared edges).
    pub fn cell_at(&self, p: Point2) -> Cell {
        Cell::new(
            (p.x / self.cell_size).floor() as i32,
            (p.y / self.cell_size).floor() as i32,
        )
    }

    /// The free cell whose center is `p`, if any (tolerance 1e-6 · cell size).
    pub fn cell_with_center(&self, p: Point2) -> Option<Cell> {
        let c = self.cell_at(p);
        let ok = self.in_bounds(c)
            && self.cell_center(c).distance(p) <= 1e-6 * self.cell_size
            && self.is_free(c);
        ok.then_some(c)
    }

    pub fn cell_rect(&self, c: Cell) -> Rect {
        let l = self.cell_size;
        Rect {
            min: Point2::new(c.x as f64 * l, c.y as f64 * l),
            max: Point2::new((c.x + 1) as f64 * l, (c.y + 1) as f64 * l),
        }
    }

    /// Cells (including out-of-map ones) whose closed squares meet the box
    /// `[lo, hi]`.
    pub(crate) fn cells_overlapping(&self, lo: Point2, hi: Point2) -> impl Iterator<Item = Cell> {
        let l = self.cell_size;
        let x0 = (lo.x / l).floor() as i32 - 1;
        let x1 = (hi.x / l).floor() as i32 + 1;
        let y0 = (lo.y / l).floor() as i32 - 1;
        let y1 = (hi.y / l).floor() as i32 + 1;
        let (x0, x1) = (x0.max(-1), x1.min(self.width as i32));
        let (y0, y1) = (y0.max(-1), y1.min(self.height as i32));
        (y0..=y1).flat_map(move |y| (x0..=x1).map(move |x| Cell::new(x, y)))
    }

    /// Distance from `p` to the closest blocked cell or to the map boundary.
    /// Only cells within `horizon` are examined; returns `horizon` if none is
    /// closer.
    pub fn static_clearance(&self, p: Point2, horizon: f64) -> f64 {
        let lo = Point2::new(p.x - horizon, p.y - horizon);
        let hi = Point2::new(p.x + horizon, p.y + horizon);
        let mut best = horizon;
        for c in self.cells_overlapping(lo, hi) {
            if self.is_blocked(c) {
                best = best.min(self.cell_rect(c).distance_to_point(p));
            }
        }
        best
    }

    /// Whether every point of the segment `a`-`b` stays at least `r` away from
    /// every blocked cell (the area outside the map counts as blocked). A
    /// distance of exactly `r` is clear.
    pub fn line_of_sight_clear(&self, a: Point2, b: Point2, r: f64) -> bool {
        let lo = Point2::new(a.x.min(b.x) - r, a.y.min(b.y) - r);
        let hi = Point2::new(a.x.max(b.x) + r, a.y.max(b.y) + r);
        for c in self.cells_overlapping(lo, hi) {
            if !self.is_blocked(c) {
                continue;
            }
            let rect = self.cell_rect(c);
            if rect.max.x < lo.x || rect.min.x > hi.x || rect.max.y < lo.y || rect.min.y > hi.y {
                continue;
            }
            if rect.distance_to_segment(a, b) < r - CLEARANCE_EPS {
                return false;
            }
        }
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_two_cell_map() {
        let m = GridMap::parse("2 1 1.0\n.@").unwrap();
        assert!(m.is_free(Cell::new(0, 0)));
        assert!(m.is_blocked(Cell::new(1, 0)));
        assert_eq!(m.num_free(), 1);
    }

    #[test]
    fn row_zero_is_y_zero() {
        let m = GridMap::parse("1 2 1.0\n@\n.\n").unwrap();
        assert!(m.is_blocked(Cell::new(0, 0)));
        assert!(m.is_free(Cell::new(0, 1)));
    }

    #[test]
    fn rejects_empty_map() {
        let e = GridMap::parse("0 3 1.0\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }), "{e}");
    }

    #[test]
    fn rejects_ragged_and_illegal() {
        let e = GridMap::parse("2 2 1.0\n..\n.\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e}");
        let e = GridMap::parse("2 1 1.0\n.x\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e}");
        let e = GridMap::parse("2 2 1.0\n..\n").unwrap_err();
        assert!(matches!(e, Error::Parse { .. }), "{e}");
        let e = GridMap::parse("2 two 1.0\n..\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }), "{e}");
        let e = GridMap::parse("2 1\n..\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 1, .. }), "{e}");
    }

    #[test]
    fn out_of_bounds_is_blocked() {
        let m = GridMap::new(3, 3, 1.0).unwrap();
        assert!(m.is_blocked(Cell::new(-1, 0)));
        assert!(m.is_blocked(Cell::new(0, 3)));
        assert!(m.is_free(Cell::new(2, 2)));
    }

    #[test]
    fn text_round_trip() {
        let text = "3 2 0.5\n.@.\n@..\n";
        let m = GridMap::parse(text).unwrap();
        assert_eq!(m.to_text(), text);
        assert_eq!(m.cell_size(), 0.5);
        assert_eq!(m.cell_center(Cell::new(1, 1)), Point2::new(0.75, 0.75));
    }

    #[test]
    fn warehouse_scale_free_map() {
        let mut text = String::from("46 70 1.0\n");
        for _ in 0..70 {
            text.push_str(&".".repeat(46));
            text.push('\n');
        }
        let m = GridMap::parse(&text).unwrap();
        assert_eq!(m.num_free(), 3220);
    }

    fn center_blocked() -> GridMap {
        GridMap::parse("3 3 1.0\n...\n.@.\n...\n").unwrap()
    }

    #[test]
    fn los_empty_map() {
        let m = GridMap::new(5, 5, 1.0).unwrap();
        assert!(m.line_of_sight_clear(Point2::new(0.5, 0.5), Point2::new(4.5, 3.5), 0.5));
    }

    #[test]
    fn los_through_blocked_center() {
        let m = center_blocked();
        assert!(!m.line_of_sight_clear(Point2::new(0.5, 0.5), Point2::new(2.5, 2.5), 0.5));
    }

    #[test]
    fn los_tangent_to_blocked_cell_is_clear() {
        let m = center_blocked();
        assert!(m.line_of_sight_clear(Point2::new(0.5, 0.5), Point2::new(0.5, 2.5), 0.5));
        assert!(!m.line_of_sight_clear(Point2::new(0.5, 0.5), Point2::new(0.5, 2.5), 0.51));
    }

    #[test]
    fn map_border_counts_as_obstacle() {
        let m = GridMap::new(3, 3, 1.0).unwrap();
        assert!(m.line_of_sight_clear(Point2::new(0.5, 0.5), Point2::new(2.5, 0.5), 0.5));
        assert!(!m.line_of_sight_clear(Point2::new(0.4, 0.5), Point2::new(2.5, 0.5), 0.5));
    }

    #[test]
    fn static_clearance_near_wall() {
        let m = center_blocked();
        let d = m.static_clearance(Point2::new(0.5, 1.5), 2.0);
        assert!((d - 0.5).abs() < 1e-12);
    }
}
