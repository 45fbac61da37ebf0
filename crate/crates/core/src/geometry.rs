//! Points, box windows, metrics and point patterns.
//!
//! A [`Window`] is a half-open box `[lower, upper)` carrying either the
//! Euclidean metric or the periodic (flat torus) metric. Samplers default
//! to the periodic metric so that finite windows behave stationarily.

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Largest supported ambient dimension.
pub const MAX_DIM: usize = 8;

/// Default upper bound on the number of cells produced by [`grid_centers`].
pub const DEFAULT_MAX_GRID_CELLS: u128 = 1 << 24;

/// A point of `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    coords: Vec<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::param("coords", format!("dimension {} outside 1..={MAX_DIM}", coords.len())));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("coords", "all coordinates must be finite"));
        }
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }
}

impl From<&[f64]> for Point {
    fn from(c: &[f64]) -> Self {
        Self { coords: c.to_vec() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Euclidean,
    Periodic,
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::Euclidean => "euclidean",
            Metric::Periodic => "periodic",
        })
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "euclidean" => Ok(Metric::Euclidean),
            "periodic" | "torus" => Ok(Metric::Periodic),
            other => Err(Error::Parse(format!("unknown metric `{other}`"))),
        }
    }
}

/// Half-open observation box `[lower, upper)` with a metric.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    lower: Vec<f64>,
    upper: Vec<f64>,
    metric: Metric,
}

impl Window {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, metric: Metric) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::InvalidWindow(format!(
                "lower has dimension {} but upper has {}",
                lower.len(),
                upper.len()
            )));
        }
        if lower.is_empty() || lower.len() > MAX_DIM {
            return Err(Error::InvalidWindow(format!("dimension {} outside 1..={MAX_DIM}", lower.len())));
        }
        for (i, (l, u)) in lower.iter().zip(&upper).enumerate() {
            if !(l.is_finite() && u.is_finite() && l < u) {
                return Err(Error::InvalidWindow(format!("axis {i}: need finite lower < upper, got [{l}, {u})")));
            }
        }
        Ok(Self { lower, upper, metric })
    }

    /// The cube `[0, side)^d`.
    pub fn cube(d: usize, side: f64, metric: Metric) -> Result<Self> {
        Self::new(vec![0.0; d], vec![side; d], metric)
    }

    /// The cube `[-side/2, side/2)^d`.
    pub fn centered_cube(d: usize, side: f64, metric: Metric) -> Result<Self> {
        Self::new(vec![-side / 2.0; d], vec![side / 2.0; d], metric)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn metric(&self) -> Metric {
        self.metric
    }

    pub fn with_metric(&self, metric: Metric) -> Self {
        Self {
            metric,
            ..self.clone()
        }
    }

    pub fn side(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn sides(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.side(i)).collect()
    }

    pub fn min_side(&self) -> f64 {
        (0..self.dim()).map(|i| self.side(i)).fold(f64::INFINITY, f64::min)
    }

    pub fn is_periodic(&self) -> bool {
        self.metric == Metric::Periodic
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.side(i)).product()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower.iter().zip(&self.upper).map(|(l, u)| 0.5 * (l + u)).collect()
    }

    pub fn half_diagonal(&self) -> f64 {
        0.5 * (0..self.dim()).map(|i| self.side(i).powi(2)).sum::<f64>().sqrt()
    }

    /// Half-open containment test.
    pub fn contains(&self, p: &[f64]) -> bool {
        p.len() == self.dim() && p.iter().zip(self.lower.iter().zip(&self.upper)).all(|(x, (l, u))| *x >= *l && *x < *u)
    }

    /// Maps a coordinate onto `[lower, upper)` modulo the side length.
    #[inline]
    pub fn wrap_coord(&self, axis: usize, x: f64) -> f64 {
        let l = self.lower[axis];
        let s = self.side(axis);
        let mut y = (x - l).rem_euclid(s) + l;
        // rem_euclid can round up to exactly `s` for tiny negative inputs
        if y >= self.upper[axis] {
            y = l;
        }
        y
    }

    /// Wraps every coordinate in place.
    pub fn wrap(&self, p: &mut [f64]) {
        for (axis, x) in p.iter_mut().enumerate() {
            *x = self.wrap_coord(axis, *x);
        }
    }

    /// Per-axis separation under the window metric.
    #[inline]
    pub fn axis_delta(&self, axis: usize, a: f64, b: f64) -> f64 {
        let d = (a - b).abs();
        match self.metric {
            Metric::Euclidean => d,
            Metric::Periodic => {
                let s = self.side(axis);
                let d = d % s;
                d.min(s - d)
            }
        }
    }

    /// Squared distance without dimension checks.
    #[inline]
    pub fn dist2(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut acc = 0.0;
        for axis in 0..a.len() {
            let d = self.axis_delta(axis, a[axis], b[axis]);
            acc += d * d;
        }
        acc
    }

    #[inline]
    pub fn dist(&self, a: &[f64], b: &[f64]) -> f64 {
        self.dist2(a, b).sqrt()
    }

    /// Uniformly distributed point in the window.
    pub fn uniform_point<R: rand::Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        for (axis, x) in out.iter_mut().enumerate() {
            let u: f64 = rng.random();
            *x = self.wrap_coord(axis, self.lower[axis] + u * self.side(axis));
        }
    }

    /// Lower corner of a uniformly random placement of a `side`-cube fully
    /// inside the window (anywhere, for periodic windows).
    pub(crate) fn random_center<R: rand::Rng + ?Sized>(&self, rng: &mut R, margin: f64) -> Vec<f64> {
        (0..self.dim())
            .map(|axis| {
                let u: f64 = rng.random();
                match self.metric {
                    Metric::Periodic => self.lower[axis] + u * self.side(axis),
                    Metric::Euclidean => {
                        let span = (self.side(axis) - 2.0 * margin).max(0.0);
                        self.lower[axis] + margin + u * span
                    }
                }
            })
            .collect()
    }
}

impl fmt::Display for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(",");
        write!(f, "[{}]..[{}] {}", join(&self.lower), join(&self.upper), self.metric)
    }
}

/// Distance between two points under the window metric.
pub fn distance(a: &Point, b: &Point, w: &Window) -> Result<f64> {
    for p in [a, b] {
        if p.dim() != w.dim() {
            return Err(Error::DimensionMismatch {
                expected: w.dim(),
                got: p.dim(),
            });
        }
    }
    Ok(w.dist(a.coords(), b.coords()))
}

/// Lebesgue measure of the window.
pub fn volume(w: &Window) -> f64 {
    w.volume()
}

/// Volume of the unit ball in `R^d`, `pi^(d/2) / Gamma(d/2 + 1)`.
pub fn unit_ball_volume(d: usize) -> Result<f64> {
    if d < 1 {
        return Err(Error::param("d", "dimension must be at least 1"));
    }
    Ok(unit_ball_volume_unchecked(d))
}

pub(crate) fn unit_ball_volume_unchecked(d: usize) -> f64 {
    // V_d = V_{d-2} * 2 pi / d with V_0 = 1, V_1 = 2
    let mut v = if d.is_multiple_of(2) { 1.0 } else { 2.0 };
    let mut k = if d.is_multiple_of(2) { 2 } else { 3 };
    while k <= d {
        v *= 2.0 * PI / k as f64;
        k += 2;
    }
    v
}

/// Centers of the `n^d` congruent cells tiling the window, first axis fastest.
pub fn grid_centers(w: &Window, n_per_axis: usize) -> Result<Vec<Point>> {
    grid_centers_with_limit(w, n_per_axis, DEFAULT_MAX_GRID_CELLS)
}

pub fn grid_centers_with_limit(w: &Window, n_per_axis: usize, max_cells: u128) -> Result<Vec<Point>> {
    let grid = CellGridSpec::new(w, n_per_axis, max_cells)?;
    Ok((0..grid.len()).map(|i| Point { coords: grid.center(i) }).collect())
}

/// Regular tiling of a window into `n^d` cells, addressed by a flat index
/// with the first axis varying fastest.
#[derive(Debug, Clone)]
pub struct CellGridSpec {
    lower: Vec<f64>,
    cell: Vec<f64>,
    n: usize,
    dim: usize,
    len: usize,
}

impl CellGridSpec {
    pub fn new(w: &Window, n_per_axis: usize, max_cells: u128) -> Result<Self> {
        if n_per_axis < 1 {
            return Err(Error::param("n_per_axis", "must be at least 1"));
        }
        let cells = (n_per_axis as u128).checked_pow(w.dim() as u32).unwrap_or(u128::MAX);
        if cells > max_cells {
            return Err(Error::GridTooLarge { cells, limit: max_cells });
        }
        Ok(Self {
            lower: w.lower().to_vec(),
            cell: w.sides().iter().map(|s| s / n_per_axis as f64).collect(),
            n: n_per_axis,
            dim: w.dim(),
            len: cells as usize,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn n_per_axis(&self) -> usize {
        self.n
    }

    pub fn cell_volume(&self) -> f64 {
        self.cell.iter().product()
    }

    pub fn cell_side(&self, axis: usize) -> f64 {
        self.cell[axis]
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        for slot in idx.iter_mut() {
            *slot = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().rev().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn center(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .enumerate()
            .map(|(axis, &i)| self.lower[axis] + (i as f64 + 0.5) * self.cell[axis])
            .collect()
    }
}

/// A finite set of points inside a window, stored as a flat coordinate array.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    window: Window,
    coords: Vec<f64>,
}

impl PointPattern {
    pub fn empty(window: Window) -> Self {
        Self { window, coords: Vec::new() }
    }

    pub fn from_points(window: Window, points: &[Point]) -> Result<Self> {
        let mut pattern = Self::empty(window);
        for p in points {
            pattern.push(p.coords())?;
        }
        Ok(pattern)
    }

    /// Builds a pattern from flat coordinates, checking every point.
    pub fn from_coords(window: Window, coords: Vec<f64>) -> Result<Self> {
        let d = window.dim();
        if !coords.len().is_multiple_of(d) {
            return Err(Error::param("coords", format!("length {} is not a multiple of dimension {d}", coords.len())));
        }
        for p in coords.chunks_exact(d) {
            check_inside(&window, p)?;
        }
        Ok(Self { window, coords })
    }

    pub(crate) fn from_coords_unchecked(window: Window, coords: Vec<f64>) -> Self {
        debug_assert!(coords.chunks_exact(window.dim()).all(|p| window.contains(p)));
        Self { window, coords }
    }

    pub fn push(&mut self, p: &[f64]) -> Result<()> {
        check_inside(&self.window, p)?;
        self.coords.extend_from_slice(p);
        Ok(())
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        let d = self.dim();
        &self.coords[i * d..(i + 1) * d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim())
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Same points viewed through a different metric.
    pub fn with_metric(&self, metric: Metric) -> Self {
        Self {
            window: self.window.with_metric(metric),
            coords: self.coords.clone(),
        }
    }

    /// Reorders points lexicographically by coordinates.
    pub fn sort_lexicographic(&mut self) {
        let d = self.dim();
        let mut pts: Vec<&[f64]> = self.coords.chunks_exact(d).collect();
        pts.sort_by(|a, b| {
            a.iter()
                .zip(b.iter())
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        self.coords = pts.concat();
    }

    /// Number of points in the half-open box `[corner, corner + side)^d`,
    /// taken modulo the window for periodic metrics.
    pub fn count_in_box(&self, corner: &[f64], side: f64) -> usize {
        self.points()
            .filter(|p| {
                (0..p.len()).all(|axis| {
                    let mut off = p[axis] - corner[axis];
                    if self.window.is_periodic() {
                        off = off.rem_euclid(self.window.side(axis));
                    }
                    (0.0..side).contains(&off)
                })
            })
            .count()
    }
}

fn check_inside(w: &Window, p: &[f64]) -> Result<()> {
    if p.len() != w.dim() {
        return Err(Error::DimensionMismatch {
            expected: w.dim(),
            got: p.len(),
        });
    }
    if !w.contains(p) {
        return Err(Error::param("point", format!("{p:?} lies outside window {w}")));
    }
    Ok(())
}
