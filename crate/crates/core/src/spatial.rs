//! Bucket-grid neighbour search for fixed-radius queries.

use crate::geometry::{PointPattern, Window};

/// Cells per window, relative to the number of points.
const CELLS_PER_POINT: usize = 4;
const MIN_CELL_BUDGET: usize = 1024;

/// Points of a pattern bucketed into a regular grid whose cells are at
/// least `radius` wide, so every neighbour within `radius` lies in one of
/// the `3^d` surrounding cells.
pub struct NeighborIndex<'a> {
    pattern: &'a PointPattern,
    radius: f64,
    counts: Vec<usize>,
    cell_side: Vec<f64>,
    starts: Vec<usize>,
    order: Vec<u32>,
}

impl<'a> NeighborIndex<'a> {
    pub fn new(pattern: &'a PointPattern, radius: f64) -> Self {
        let w = pattern.window();
        let d = w.dim();
        let budget = (CELLS_PER_POINT * pattern.len()).max(MIN_CELL_BUDGET);
        let mut counts: Vec<usize> = (0..d)
            .map(|axis| {
                if radius > 0.0 {
                    ((w.side(axis) / radius).floor() as usize).clamp(1, 1 << 20)
                } else {
                    1 << 20
                }
            })
            .collect();
        while counts.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c)).is_none_or(|t| t > budget) {
            let (imax, _) = counts.iter().enumerate().max_by_key(|(_, c)| **c).unwrap();
            counts[imax] = (counts[imax] / 2).max(1);
            if counts.iter().all(|&c| c == 1) {
                break;
            }
        }
        let cell_side: Vec<f64> = (0..d).map(|axis| w.side(axis) / counts[axis] as f64).collect();
        let total: usize = counts.iter().product();

        let mut index = Self {
            pattern,
            radius,
            counts,
            cell_side,
            starts: vec![0; total + 1],
            order: vec![0; pattern.len()],
        };
        let cells: Vec<usize> = pattern.points().map(|p| index.cell_of(p)).collect();
        for &c in &cells {
            index.starts[c + 1] += 1;
        }
        for c in 0..total {
            index.starts[c + 1] += index.starts[c];
        }
        let mut fill = index.starts.clone();
        for (i, &c) in cells.iter().enumerate() {
            index.order[fill[c]] = i as u32;
            fill[c] += 1;
        }
        index
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    fn window(&self) -> &Window {
        self.pattern.window()
    }

    fn axis_cell(&self, axis: usize, x: f64) -> usize {
        let w = self.window();
        let c = ((x - w.lower()[axis]) / self.cell_side[axis]).floor();
        (c.max(0.0) as usize).min(self.counts[axis] - 1)
    }

    fn cell_of(&self, p: &[f64]) -> usize {
        let mut flat = 0;
        for axis in (0..p.len()).rev() {
            flat = flat * self.counts[axis] + self.axis_cell(axis, p[axis]);
        }
        flat
    }

    fn axis_neighbors(&self, axis: usize, c: usize) -> Vec<usize> {
        let n = self.counts[axis];
        if self.window().is_periodic() {
            if n < 3 {
                (0..n).collect()
            } else {
                vec![(c + n - 1) % n, c, (c + 1) % n]
            }
        } else {
            (c.saturating_sub(1)..=(c + 1).min(n - 1)).collect()
        }
    }

    /// Calls `visit(j, dist2)` for every point `j` within the index radius
    /// of `x` (inclusive).
    pub fn for_each_within(&self, x: &[f64], mut visit: impl FnMut(usize, f64)) {
        let w = self.window();
        let d = x.len();
        let r2 = self.radius * self.radius;
        let lists: Vec<Vec<usize>> = (0..d).map(|axis| self.axis_neighbors(axis, self.axis_cell(axis, x[axis]))).collect();
        let mut odo = vec![0usize; d];
        loop {
            let mut flat = 0;
            for axis in (0..d).rev() {
                flat = flat * self.counts[axis] + lists[axis][odo[axis]];
            }
            for &j in &self.order[self.starts[flat]..self.starts[flat + 1]] {
                let j = j as usize;
                let d2 = w.dist2(x, self.pattern.point(j));
                if d2 <= r2 {
                    visit(j, d2);
                }
            }
            let mut axis = 0;
            loop {
                if axis == d {
                    return;
                }
                odo[axis] += 1;
                if odo[axis] < lists[axis].len() {
                    break;
                }
                odo[axis] = 0;
                axis += 1;
            }
        }
    }

    /// Unordered pairs `(i, j, dist2)` with `i < j` within the radius.
    pub fn pairs(&self) -> Vec<(u32, u32, f64)> {
        let mut out = Vec::new();
        for i in 0..self.pattern.len() {
            self.for_each_within(self.pattern.point(i), |j, d2| {
                if j > i {
                    out.push((i as u32, j as u32, d2));
                }
            });
        }
        out.sort_unstable_by_key(|&(a, b, _)| (a, b));
        out
    }

    pub fn count_within(&self, x: &[f64]) -> usize {
        let mut n = 0;
        self.for_each_within(x, |_, _| n += 1);
        n
    }
}
