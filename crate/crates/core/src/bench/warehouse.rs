use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid_world::GridMap;

/// Rows of rectangular shelving racks separated by aisles, with
/// cross-corridors between rack rows and a free border.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WarehouseLayout {
    pub width: usize,
    pub height: usize,
    pub cell_size: f64,
    /// Free cells kept along every map edge.
    pub margin: usize,
    /// Rack extent across the aisles, cells.
    pub rack_width: usize,
    /// Rack extent along the aisles, cells.
    pub rack_length: usize,
    pub aisle_width: usize,
    pub cross_width: usize,
}

impl Default for WarehouseLayout {
    fn default() -> Self {
        WarehouseLayout {
            width: 46,
            height: 70,
            cell_size: 1.0,
            margin: 4,
            rack_width: 4,
            rack_length: 12,
            aisle_width: 4,
            cross_width: 4,
        }
    }
}

impl WarehouseLayout {
    pub fn build(&self) -> Result<GridMap> {
        if self.rack_width == 0 || self.rack_length == 0 || self.aisle_width == 0 || self.cross_width == 0 {
            return Err(Error::invalid("warehouse layout", "rack, aisle and corridor sizes must be positive"));
        }
        let xs = rack_starts(self.width, self.margin, self.rack_width, self.aisle_width);
        let ys = rack_starts(self.height, self.margin, self.rack_length, self.cross_width);
        let mut blocked = vec![false; self.width * self.height];
        for &y0 in &ys {
            for &x0 in &xs {
                for y in y0..y0 + self.rack_length {
                    for x in x0..x0 + self.rack_width {
                        blocked[y * self.width + x] = true;
                    }
                }
            }
        }
        GridMap::from_blocked(self.width, self.height, self.cell_size, blocked)
    }
}

/// Offsets of as many `size`-long racks with `gap` between them as fit
/// inside the margins, centered.
fn rack_starts(extent: usize, margin: usize, size: usize, gap: usize) -> Vec<usize> {
    let usable = extent.saturating_sub(2 * margin);
    if usable < size {
        return Vec::new();
    }
    let n = (usable + gap) / (size + gap);
    let used = n * size + (n - 1) * gap;
    let first = margin + (usable - used) / 2;
    (0..n).map(|i| first + i * (size + gap)).collect()
}
