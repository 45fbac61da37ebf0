//! Gilbert graphs, components, finite-window percolation proxies,
//! k-percolation on a close-packed grid and SINR graphs.

use crate::error::{Error, Result};
use crate::geometry::{unit_ball_volume_unchecked, CellGridSpec, Metric, PointPattern, Window, DEFAULT_MAX_GRID_CELLS};
use crate::procgen::GeneratorSpec;
use crate::shotnoise::{coverage_counts, ResponseFunction};
use crate::spatial::NeighborIndex;
use crate::stats::{check_increasing, check_reps, replicate, EstimateWithError};
use crate::stream::RandomStream;

/// Undirected simple graph on `0..n_vertices`, edges stored as sorted `(i, j)` with `i < j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n_vertices: usize,
    edges: Vec<(u32, u32)>,
}

impl Graph {
    pub fn new(n_vertices: usize, edges: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut e: Vec<(u32, u32)> = edges.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
        e.sort_unstable();
        for w in e.windows(2) {
            if w[0] == w[1] {
                return Err(Error::param("edges", format!("duplicate edge {:?}", w[0])));
            }
        }
        for &(a, b) in &e {
            if a == b {
                return Err(Error::param("edges", format!("self-loop at {a}")));
            }
            if b as usize >= n_vertices {
                return Err(Error::param("edges", format!("vertex {b} out of range")));
            }
        }
        Ok(Graph { n_vertices, edges: e })
    }

    pub fn empty(n_vertices: usize) -> Self {
        Graph {
            n_vertices,
            edges: Vec::new(),
        }
    }

    pub fn complete(n_vertices: usize) -> Self {
        let n = n_vertices as u32;
        Graph {
            n_vertices,
            edges: (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect(),
        }
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: u32, b: u32) -> bool {
        self.edges.binary_search(&(a.min(b), a.max(b))).is_ok()
    }

    /// Sorted neighbour lists.
    pub fn adjacency(&self) -> Vec<Vec<u32>> {
        let mut adj = vec![Vec::new(); self.n_vertices];
        for &(a, b) in &self.edges {
            adj[a as usize].push(b);
            adj[b as usize].push(a);
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        adj
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n_vertices];
        for &(a, b) in &self.edges {
            deg[a as usize] += 1;
            deg[b as usize] += 1;
        }
        deg
    }

    /// Edge list as CSV `i,j`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("i,j\n");
        for (a, b) in &self.edges {
            s.push_str(&format!("{a},{b}\n"));
        }
        s
    }
}

/// Disjoint-set forest with union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let p = self.parent[x as usize];
            self.parent[x as usize] = self.parent[p as usize];
            x = p;
        }
        x
    }

    /// Returns true when the two sets were distinct.
    pub fn union(&mut self, a: u32, b: u32) -> bool {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return false;
        }
        if self.size[a as usize] < self.size[b as usize] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parent[b as usize] = a;
        self.size[a as usize] += self.size[b as usize];
        true
    }

    pub fn component_size(&mut self, x: u32) -> usize {
        let r = self.find(x);
        self.size[r as usize] as usize
    }

    /// Component sizes, largest first.
    pub fn sizes(&mut self) -> Vec<usize> {
        let n = self.parent.len();
        let roots: Vec<u32> = (0..n as u32).filter(|&i| self.find(i) == i).collect();
        let mut s: Vec<usize> = roots.iter().map(|&i| self.size[i as usize] as usize).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }
}

fn check_graph_radius(w: &Window, reach: f64, what: &'static str) -> Result<()> {
    if !(reach.is_finite() && reach >= 0.0) {
        return Err(Error::param(what, format!("{reach} must be non-negative")));
    }
    if w.is_periodic() && 2.0 * reach >= w.min_side() {
        return Err(Error::param(what, "connection distance must stay below half the window side on a torus"));
    }
    Ok(())
}

/// Pairs within distance `reach`, with squared distances.
fn close_pairs(p: &PointPattern, reach: f64) -> Vec<(u32, u32, f64)> {
    if p.len() < 2 {
        return Vec::new();
    }
    NeighborIndex::new(p, reach).pairs()
}

/// Edge iff the points are at distance at most `2r`.
pub fn gilbert_graph(pattern: &PointPattern, r: f64) -> Result<Graph> {
    check_graph_radius(pattern.window(), 2.0 * r, "r")?;
    let mut edges: Vec<(u32, u32)> = close_pairs(pattern, 2.0 * r).into_iter().map(|(i, j, _)| (i, j)).collect();
    edges.sort_unstable();
    Ok(Graph {
        n_vertices: pattern.len(),
        edges,
    })
}

/// Component sizes in descending order.
pub fn components(g: &Graph) -> Vec<usize> {
    let mut uf = UnionFind::new(g.n_vertices);
    for &(a, b) in &g.edges {
        uf.union(a, b);
    }
    uf.sizes()
}

/// Mean component fractions and crossing probabilities over a radius grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PercolationSweep {
    pub radii: Vec<f64>,
    pub crossing_prob: Vec<EstimateWithError>,
    pub largest_fraction: Vec<EstimateWithError>,
    pub second_fraction: Vec<EstimateWithError>,
}

/// Whether some component touches both slabs `x_0 < lo + 2r` and `x_0 > hi - 2r`.
fn crosses(p: &PointPattern, uf: &mut UnionFind, r: f64) -> bool {
    let w = p.window();
    let (lo, hi) = (w.lower()[0] + 2.0 * r, w.upper()[0] - 2.0 * r);
    let n = p.len();
    let mut left = vec![false; n];
    for i in 0..n {
        if p.point(i)[0] < lo {
            let root = uf.find(i as u32) as usize;
            left[root] = true;
        }
    }
    (0..n).any(|i| p.point(i)[0] > hi && left[uf.find(i as u32) as usize])
}

struct SweepRow {
    largest: Vec<f64>,
    second: Vec<f64>,
    crossing: Vec<f64>,
}

/// Adds edges in order of length and reads off the statistics at each radius.
fn sweep_pattern(p: &PointPattern, radii: &[f64]) -> SweepRow {
    let r_max = radii.last().copied().unwrap_or(0.0);
    let mut pairs = close_pairs(p, 2.0 * r_max);
    pairs.sort_unstable_by(|a, b| a.2.total_cmp(&b.2).then((a.0, a.1).cmp(&(b.0, b.1))));
    let n = p.len();
    let mut uf = UnionFind::new(n);
    let mut next = 0;
    let mut row = SweepRow {
        largest: Vec::new(),
        second: Vec::new(),
        crossing: Vec::new(),
    };
    for &r in radii {
        let limit = 4.0 * r * r;
        while next < pairs.len() && pairs[next].2 <= limit {
            uf.union(pairs[next].0, pairs[next].1);
            next += 1;
        }
        let sizes = uf.sizes();
        let frac = |k: usize| if n == 0 { 0.0 } else { sizes.get(k).copied().unwrap_or(0) as f64 / n as f64 };
        row.largest.push(frac(0));
        row.second.push(frac(1));
        row.crossing.push(crosses(p, &mut uf, r) as u8 as f64);
    }
    row
}

fn check_radii(w: &Window, radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(Error::param("radii", "need at least one radius"));
    }
    check_increasing("radii", radii)?;
    check_graph_radius(w, 2.0 * radii[radii.len() - 1], "radii")?;
    check_graph_radius(w, 2.0 * radii[0], "radii")
}

/// Largest and second-largest component fractions, and left-right crossing
/// indicators, for every radius of an increasing grid; each replication
/// reuses one pattern across all radii.
pub fn component_fraction_sweep(
    spec: &GeneratorSpec,
    w: &Window,
    radii: &[f64],
    reps: usize,
    stream: &RandomStream,
) -> Result<PercolationSweep> {
    check_reps(reps)?;
    check_radii(w, radii)?;
    let sampler = spec.sampler(w)?;
    let rows = replicate(reps, stream, |_, st| sweep_pattern(&sampler.sample(&st), radii));
    let column = |f: &dyn Fn(&SweepRow) -> &Vec<f64>, k: usize| {
        EstimateWithError::from_samples(&rows.iter().map(|r| f(r)[k]).collect::<Vec<_>>())
    };
    Ok(PercolationSweep {
        radii: radii.to_vec(),
        crossing_prob: (0..radii.len()).map(|k| column(&|r| &r.crossing, k)).collect(),
        largest_fraction: (0..radii.len()).map(|k| column(&|r| &r.largest, k)).collect(),
        second_fraction: (0..radii.len()).map(|k| column(&|r| &r.second, k)).collect(),
    })
}

/// Crossing probabilities on the Euclidean version of `w` over a radius grid.
pub fn crossing_sweep(
    spec: &GeneratorSpec,
    w: &Window,
    radii: &[f64],
    reps: usize,
    stream: &RandomStream,
) -> Result<Vec<EstimateWithError>> {
    let flat = w.with_metric(Metric::Euclidean);
    Ok(component_fraction_sweep(spec, &flat, radii, reps, stream)?.crossing_prob)
}

/// Fraction of replications in which a component of the Gilbert graph
/// joins the left and right face slabs of width `2r` (Euclidean metric).
pub fn crossing_probability(spec: &GeneratorSpec, w: &Window, r: f64, reps: usize, stream: &RandomStream) -> Result<EstimateWithError> {
    Ok(crossing_sweep(spec, w, &[r], reps, stream)?[0])
}

/// Smallest radius at which the pattern crosses, to within `tol`.
fn crossing_threshold(p: &PointPattern, r_max: f64, tol: f64) -> f64 {
    let mut pairs = close_pairs(p, 2.0 * r_max);
    pairs.sort_unstable_by(|a, b| a.2.total_cmp(&b.2));
    let crosses_at = |r: f64| {
        let mut uf = UnionFind::new(p.len());
        for &(i, j, d2) in pairs.iter().take_while(|e| e.2 <= 4.0 * r * r) {
            let _ = d2;
            uf.union(i, j);
        }
        crosses(p, &mut uf, r)
    };
    if !crosses_at(r_max) {
        return f64::INFINITY;
    }
    let (mut lo, mut hi) = (0.0, r_max);
    if crosses_at(0.0) {
        return 0.0;
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if crosses_at(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Finite-window critical radius: the radius where the crossing probability
/// reaches one half, found by bisection to bracket width `tol`.
///
/// Replications are shared across bisection steps, so the crossing
/// probability is monotone in `r` and the bisection is well defined. The
/// error is the bracket half-width plus the binomial standard error at the
/// midpoint divided by the local slope.
pub fn critical_radius(spec: &GeneratorSpec, w: &Window, reps: usize, tol: f64, stream: &RandomStream) -> Result<EstimateWithError> {
    check_reps(reps)?;
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::param("tol", format!("{tol} must be positive")));
    }
    let flat = w.with_metric(Metric::Euclidean);
    let diag: f64 = flat.sides().iter().map(|s| s * s).sum::<f64>().sqrt();
    let r_max = diag / 4.0;
    let sampler = spec.sampler(&flat)?;
    let resolution = tol / 16.0;
    let thresholds: Vec<f64> = replicate(reps, stream, |_, st| crossing_threshold(&sampler.sample(&st), r_max, resolution));
    let prob = |r: f64| thresholds.iter().filter(|t| **t <= r).count() as f64 / reps as f64;
    if prob(0.0) >= 0.5 || prob(r_max) < 0.5 {
        return Err(Error::NoBracket(format!("crossing probability does not pass 1/2 on [0, {r_max}]")));
    }
    let (mut lo, mut hi) = (0.0, r_max);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if prob(mid) >= 0.5 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mid = 0.5 * (lo + hi);
    let delta = (4.0 * tol).max(0.05 * mid);
    let slope = (prob(mid + delta) - prob((mid - delta).max(0.0))) / (mid + delta - (mid - delta).max(0.0));
    let p = prob(mid).clamp(0.0, 1.0);
    let se_p = (p * (1.0 - p) / reps as f64).sqrt().max(0.5 / reps as f64);
    let spread = if slope > 0.0 { se_p / slope } else { delta };
    Ok(EstimateWithError {
        value: mid,
        std_error: 0.5 * (hi - lo) + spread,
        replications: reps,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundVerdict {
    Below,
    In,
    Above,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundsCheck {
    pub lower: f64,
    pub upper: f64,
    pub verdict: BoundVerdict,
}

/// `1/(lambda kappa_d)^(1/d) <= r_c <= sqrt(d) (log(3^d - 2)/lambda)^(1/d)`.
pub fn percolation_bounds(lambda: f64, d: usize) -> Result<(f64, f64)> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::param("lambda", format!("{lambda} must be positive")));
    }
    if d == 0 || d > crate::geometry::MAX_DIM {
        return Err(Error::param("d", format!("{d} out of range")));
    }
    let df = d as f64;
    let lower = (lambda * unit_ball_volume_unchecked(d)).powf(-1.0 / df);
    let upper = df.sqrt() * ((3f64.powi(d as i32) - 2.0).ln() / lambda).powf(1.0 / df);
    Ok((lower, upper))
}

pub fn check_percolation_bounds(r_hat: f64, lambda: f64, d: usize) -> Result<BoundsCheck> {
    let (lower, upper) = percolation_bounds(lambda, d)?;
    let verdict = if r_hat < lower {
        BoundVerdict::Below
    } else if r_hat > upper {
        BoundVerdict::Above
    } else {
        BoundVerdict::In
    };
    Ok(BoundsCheck { lower, upper, verdict })
}

/// Left-right crossing of open cells (coverage at least `k` at the cell
/// centre) under close-packed adjacency, along axis 0.
pub fn open_cells_cross(open: &[bool], grid: &CellGridSpec, d: usize) -> bool {
    let n = grid.n_per_axis();
    let mut seen = vec![false; open.len()];
    let mut stack: Vec<usize> = (0..open.len()).filter(|&c| open[c] && grid.multi_index(c)[0] == 0).collect();
    for &c in &stack {
        seen[c] = true;
    }
    let offsets: Vec<Vec<i64>> = (0..3usize.pow(d as u32))
        .map(|m| (0..d).map(|a| (m / 3usize.pow(a as u32)) as i64 % 3 - 1).collect())
        .filter(|o: &Vec<i64>| o.iter().any(|v| *v != 0))
        .collect();
    let mut nb = vec![0usize; d];
    while let Some(c) = stack.pop() {
        let idx = grid.multi_index(c);
        if idx[0] == n - 1 {
            return true;
        }
        'next: for o in &offsets {
            for a in 0..d {
                let v = idx[a] as i64 + o[a];
                if v < 0 || v >= n as i64 {
                    continue 'next;
                }
                nb[a] = v as usize;
            }
            let f = grid.flat_index(&nb);
            if open[f] && !seen[f] {
                seen[f] = true;
                stack.push(f);
            }
        }
    }
    false
}

/// Crossing probabilities of the k-covered grid surrogate for an
/// increasing radius grid; each replication reuses one pattern.
pub fn k_percolation_sweep(
    spec: &GeneratorSpec,
    w: &Window,
    radii: &[f64],
    k: u32,
    grid_n: usize,
    reps: usize,
    stream: &RandomStream,
) -> Result<Vec<EstimateWithError>> {
    check_reps(reps)?;
    if k < 1 {
        return Err(Error::param("k", "coverage order must be at least 1"));
    }
    if radii.is_empty() {
        return Err(Error::param("radii", "need at least one radius"));
    }
    check_increasing("radii", radii)?;
    if radii[0] < 0.0 {
        return Err(Error::param("radii", "must be non-negative"));
    }
    let flat = w.with_metric(Metric::Euclidean);
    let grid = CellGridSpec::new(&flat, grid_n, DEFAULT_MAX_GRID_CELLS)?;
    let sampler = spec.sampler(&flat)?;
    let d = flat.dim();
    let rows: Vec<Vec<f64>> = replicate(reps, stream, |_, st| {
        let p = sampler.sample(&st);
        radii
            .iter()
            .map(|r| {
                let open: Vec<bool> = coverage_counts(&p, *r, &grid).into_iter().map(|c| c >= k).collect();
                open_cells_cross(&open, &grid, d) as u8 as f64
            })
            .collect()
    });
    Ok((0..radii.len())
        .map(|i| EstimateWithError::from_samples(&rows.iter().map(|r| r[i]).collect::<Vec<_>>()))
        .collect())
}

pub fn k_percolation_crossing(
    spec: &GeneratorSpec,
    w: &Window,
    r: f64,
    k: u32,
    grid_n: usize,
    reps: usize,
    stream: &RandomStream,
) -> Result<EstimateWithError> {
    Ok(k_percolation_sweep(spec, w, &[r], k, grid_n, reps, stream)?[0])
}

/// Crossing probability at fixed `r` and `k` for several grid resolutions.
pub fn k_percolation_resolution(
    spec: &GeneratorSpec,
    w: &Window,
    r: f64,
    k: u32,
    grid_ns: &[usize],
    reps: usize,
    stream: &RandomStream,
) -> Result<Vec<(usize, EstimateWithError)>> {
    grid_ns
        .iter()
        .map(|&n| Ok((n, k_percolation_crossing(spec, w, r, k, n, reps, stream)?)))
        .collect()
}

/// Signal power, noise, SINR threshold, interference factor and attenuation.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrParams {
    pub power: f64,
    pub noise: f64,
    pub threshold: f64,
    pub gamma: f64,
    pub attenuation: ResponseFunction,
}

impl SinrParams {
    pub fn validate(&self, d: usize) -> Result<()> {
        if !(self.power.is_finite() && self.power > 0.0) {
            return Err(Error::param("power", "must be positive"));
        }
        if !(self.noise.is_finite() && self.noise >= 0.0) {
            return Err(Error::param("noise", "must be non-negative"));
        }
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(Error::param("threshold", "must be positive"));
        }
        if !(self.gamma >= 0.0) {
            return Err(Error::param("gamma", "must be non-negative"));
        }
        let l = &self.attenuation;
        match l {
            ResponseFunction::IndicatorBall { .. } => {
                return Err(Error::param("attenuation", "must be strictly decreasing on its support"));
            }
            ResponseFunction::Tabulated { values, .. } => {
                let support: Vec<f64> = values.iter().copied().take_while(|v| *v > 0.0).collect();
                if support.windows(2).any(|w| w[1] >= w[0]) {
                    return Err(Error::param("attenuation", "must be strictly decreasing on its support"));
                }
            }
            _ => {}
        }
        // integrability of x l(x) on the half line
        l.validate(d.max(2))?;
        let l0 = l.eval(0.0);
        if l0 > 1.0 {
            return Err(Error::param("attenuation", format!("l(0) = {l0} exceeds 1")));
        }
        if l0 < self.threshold * self.noise / self.power {
            return Err(Error::param("attenuation", "l(0) is below TN/P: no link can form"));
        }
        Ok(())
    }

    /// `l^{-1}(TN/P)`, the link range without interference.
    pub fn noise_limited_range(&self) -> f64 {
        let target = self.threshold * self.noise / self.power;
        let l = &self.attenuation;
        if target <= 0.0 {
            return l.support_radius().unwrap_or(f64::INFINITY);
        }
        match l {
            ResponseFunction::Exponential { beta } => -target.ln() / beta,
            ResponseFunction::PowerLaw { beta, eps } => (target.powf(-1.0 / beta) - eps).max(0.0),
            _ => {
                let (mut lo, mut hi) = (0.0, l.support_radius().unwrap_or(1.0));
                while l.eval(hi) >= target && hi < 1e12 {
                    hi *= 2.0;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if l.eval(mid) >= target {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        }
    }
}

const SELF_EXCLUSION: f64 = 1e-12;

/// Interference at `y` from `interferers`, skipping any point within
/// `1e-12` of `y` or of the transmitter `x`.
fn interference(interferers: &PointPattern, l: &ResponseFunction, x: &[f64], y: &[f64]) -> f64 {
    let w = interferers.window();
    interferers
        .points()
        .filter(|z| w.dist(z, x) > SELF_EXCLUSION && w.dist(z, y) > SELF_EXCLUSION)
        .map(|z| l.eval(w.dist(z, y)))
        .sum()
}

/// `P l(|x - y|) / (N + gamma P I(y))`, interference excluding `x` and `y`.
pub fn sinr(x: &[f64], y: &[f64], interferers: &PointPattern, params: &SinrParams) -> f64 {
    let w = interferers.window();
    let signal = params.power * params.attenuation.eval(w.dist(x, y));
    if signal == 0.0 {
        return 0.0;
    }
    let i = if params.gamma > 0.0 {
        interference(interferers, &params.attenuation, x, y)
    } else {
        0.0
    };
    signal / (params.noise + params.gamma * params.power * i)
}

/// Edge between `X` and `Y` of `pattern_b` when both directed SINRs reach
/// the threshold `T`.
pub fn sinr_graph(pattern_b: &PointPattern, pattern_i: &PointPattern, params: &SinrParams) -> Result<Graph> {
    let w = pattern_b.window();
    if w != pattern_i.window() {
        return Err(Error::param("pattern_i", "patterns must share a window"));
    }
    params.validate(w.dim())?;
    // the SINR never exceeds the noise-limited SNR, so only pairs within range can link
    let range = params.noise_limited_range();
    let reach = if range.is_finite() { range } else { w.half_diagonal() * 2.0 };
    let candidates: Vec<(u32, u32)> = if pattern_b.len() < 2 {
        Vec::new()
    } else if w.is_periodic() && 2.0 * reach >= w.min_side() {
        let n = pattern_b.len() as u32;
        (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
    } else {
        NeighborIndex::new(pattern_b, reach).pairs().into_iter().map(|(i, j, _)| (i, j)).collect()
    };
    let t = params.threshold;
    let mut edges: Vec<(u32, u32)> = candidates
        .into_iter()
        .filter(|&(i, j)| {
            let (x, y) = (pattern_b.point(i as usize), pattern_b.point(j as usize));
            sinr(x, y, pattern_i, params) >= t && sinr(y, x, pattern_i, params) >= t
        })
        .collect();
    edges.sort_unstable();
    Graph::new(pattern_b.len(), edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::procgen::sample;

    fn line(xs: &[f64]) -> PointPattern {
        let w = Window::new(vec![-10.0, -10.0], vec![10.0, 10.0], Metric::Euclidean).unwrap();
        PointPattern::from_coords(w, xs.iter().flat_map(|x| [*x, 0.0]).collect()).unwrap()
    }

    fn brute_force(p: &PointPattern, reach: f64) -> Vec<(u32, u32)> {
        let w = p.window();
        let mut e = Vec::new();
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if w.dist2(p.point(i), p.point(j)) <= reach * reach {
                    e.push((i as u32, j as u32));
                }
            }
        }
        e
    }

    #[test]
    fn gilbert_examples() {
        let p = line(&[0.0, 1.0, 3.0]);
        assert_eq!(gilbert_graph(&p, 0.75).unwrap().edges(), &[(0, 1)]);
        assert_eq!(gilbert_graph(&p, 0.0).unwrap().n_edges(), 0);
        let torus = Window::cube(2, 4.0, Metric::Periodic).unwrap();
        let q = PointPattern::from_coords(torus, vec![1.0, 1.0]).unwrap();
        assert!(gilbert_graph(&q, 1.0).is_err());
        assert!(gilbert_graph(&q, 0.99).is_ok());
    }

    #[test]
    fn gilbert_matches_brute_force() {
        for (seed, metric) in [(1, Metric::Euclidean), (2, Metric::Periodic), (3, Metric::Periodic)] {
            let w = Window::cube(2, 10.0, metric).unwrap();
            let p = sample(&GeneratorSpec::BinomialProcess { count: 50 }, &w, &RandomStream::new(seed)).unwrap();
            for r in [0.0, 0.3, 0.8, 1.7, 2.4] {
                assert_eq!(gilbert_graph(&p, r).unwrap().edges(), &brute_force(&p, 2.0 * r)[..]);
            }
        }
    }

    #[test]
    fn component_examples() {
        assert_eq!(components(&Graph::new(3, [(0, 1)]).unwrap()), vec![2, 1]);
        assert_eq!(components(&Graph::complete(5)), vec![5]);
        assert_eq!(components(&Graph::empty(4)), vec![1, 1, 1, 1]);
        assert!(Graph::new(3, [(0, 0)]).is_err());
        assert!(Graph::new(3, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::new(3, [(0, 3)]).is_err());
    }

    #[test]
    fn adding_an_edge_never_splits() {
        let w = Window::cube(2, 8.0, Metric::Euclidean).unwrap();
        let p = sample(&GeneratorSpec::BinomialProcess { count: 40 }, &w, &RandomStream::new(4)).unwrap();
        let g = gilbert_graph(&p, 0.5).unwrap();
        let before = components(&g).len();
        for (a, b) in [(0u32, 1u32), (5, 17), (3, 39)] {
            if g.has_edge(a, b) {
                continue;
            }
            let mut e = g.edges().to_vec();
            e.push((a, b));
            let h = Graph::new(g.n_vertices(), e).unwrap();
            let sizes = components(&h);
            assert!(sizes.len() <= before);
            assert_eq!(sizes.iter().sum::<usize>(), 40);
        }
    }

    #[test]
    fn sweep_extremes() {
        let w = Window::cube(2, 6.0, Metric::Periodic).unwrap();
        let spec = GeneratorSpec::BinomialProcess { count: 20 };
        let s = component_fraction_sweep(&spec, &w, &[0.0, 1.4], 5, &RandomStream::new(5)).unwrap();
        assert_eq!(s.largest_fraction[0].value, 0.05);
        assert_eq!(s.second_fraction[0].value, 0.05);
        let w = Window::cube(2, 2.0, Metric::Periodic).unwrap();
        let full = component_fraction_sweep(&spec, &w, &[0.49], 3, &RandomStream::new(5)).unwrap();
        assert!(full.largest_fraction[0].value > 0.99);
        assert!(component_fraction_sweep(&spec, &w, &[0.4, 0.3], 3, &RandomStream::new(5)).is_err());
    }

    #[test]
    fn crossing_examples() {
        let w = Window::cube(2, 10.0, Metric::Euclidean).unwrap();
        let empty = GeneratorSpec::HomogeneousPoisson { intensity: 0.0 };
        assert_eq!(crossing_probability(&empty, &w, 0.5, 10, &RandomStream::new(6)).unwrap().value, 0.0);
        let lattice: GeneratorSpec = "square_lattice(spacing=0.5)".parse().unwrap();
        assert_eq!(crossing_probability(&lattice, &w, 0.26, 10, &RandomStream::new(6)).unwrap().value, 1.0);
    }

    #[test]
    fn crossing_is_monotone_per_seed() {
        let w = Window::cube(2, 12.0, Metric::Euclidean).unwrap();
        let spec = GeneratorSpec::HomogeneousPoisson { intensity: 1.0 };
        let sampler = spec.sampler(&w).unwrap();
        let radii: Vec<f64> = (1..=20).map(|i| 0.05 * i as f64).collect();
        for seed in 0..20 {
            let row = sweep_pattern(&sampler.sample(&RandomStream::new(seed)), &radii);
            assert!(row.crossing.windows(2).all(|c| c[0] <= c[1]));
            let t = crossing_threshold(&sampler.sample(&RandomStream::new(seed)), 3.0, 1e-6);
            for (r, c) in radii.iter().zip(&row.crossing) {
                if (r - t).abs() > 1e-5 {
                    assert_eq!(*c == 1.0, *r >= t, "seed {seed} r {r} t {t}");
                }
            }
        }
    }

    #[test]
    fn bounds() {
        let (lo, hi) = percolation_bounds(1.0, 2).unwrap();
        assert!((lo - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-12);
        assert!((hi - 2f64.sqrt() * 7f64.ln().sqrt()).abs() < 1e-12);
        assert!((hi - 1.97277).abs() < 1e-5);
        assert_eq!(check_percolation_bounds(0.599, 1.0, 2).unwrap().verdict, BoundVerdict::In);
        assert_eq!(check_percolation_bounds(0.3, 1.0, 2).unwrap().verdict, BoundVerdict::Below);
        assert_eq!(check_percolation_bounds(2.5, 1.0, 2).unwrap().verdict, BoundVerdict::Above);
        assert!(percolation_bounds(0.0, 2).is_err());
    }

    #[test]
    fn close_packed_crossing() {
        let w = Window::cube(2, 3.0, Metric::Euclidean).unwrap();
        let grid = CellGridSpec::new(&w, 3, 100).unwrap();
        // a diagonal staircase crosses only with diagonal adjacency
        let mut open = vec![false; 9];
        for idx in [[0, 0], [1, 1], [2, 2]] {
            open[grid.flat_index(&idx)] = true;
        }
        assert!(open_cells_cross(&open, &grid, 2));
        open[grid.flat_index(&[1, 1])] = false;
        assert!(!open_cells_cross(&open, &grid, 2));
    }

    #[test]
    fn k_percolation() {
        let w = Window::cube(2, 8.0, Metric::Euclidean).unwrap();
        let spec = GeneratorSpec::HomogeneousPoisson { intensity: 4.0 };
        assert_eq!(k_percolation_crossing(&spec, &w, 3.0, 1, 32, 4, &RandomStream::new(7)).unwrap().value, 1.0);
        let two = GeneratorSpec::BinomialProcess { count: 3 };
        assert_eq!(k_percolation_crossing(&two, &w, 3.0, 4, 32, 4, &RandomStream::new(7)).unwrap().value, 0.0);
        let radii: Vec<f64> = (1..=8).map(|i| 0.1 * i as f64).collect();
        let st = RandomStream::new(8);
        let flat = w.clone();
        let grid = CellGridSpec::new(&flat, 48, 1 << 20).unwrap();
        let smp = spec.sampler(&flat).unwrap();
        for seed in 0..10 {
            let p = smp.sample(&st.derive(seed));
            let cross: Vec<bool> = radii
                .iter()
                .map(|r| {
                    let open: Vec<bool> = coverage_counts(&p, *r, &grid).into_iter().map(|c| c >= 2).collect();
                    open_cells_cross(&open, &grid, 2)
                })
                .collect();
            assert!(cross.windows(2).all(|c| c[0] <= c[1]));
        }
        let curve = k_percolation_sweep(&spec, &w, &radii, 2, 48, 10, &st).unwrap();
        assert!(curve.windows(2).all(|c| c[0].value <= c[1].value));
    }

    fn exp_params(gamma: f64) -> SinrParams {
        SinrParams {
            power: 1.0,
            noise: 0.1,
            threshold: 1.0,
            gamma,
            attenuation: ResponseFunction::Exponential { beta: 1.0 },
        }
    }

    #[test]
    fn sinr_two_points() {
        let empty = PointPattern::empty(line(&[]).window().clone());
        for (d, edge) in [(2.30, true), (2.31, false)] {
            let p = line(&[0.0, d]);
            assert_eq!(sinr_graph(&p, &empty, &exp_params(0.0)).unwrap().n_edges(), edge as usize);
        }
        assert!((exp_params(0.0).noise_limited_range() - 10f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn sinr_reduces_to_gilbert_and_is_monotone() {
        let w = Window::cube(2, 10.0, Metric::Euclidean).unwrap();
        let params = exp_params(0.0);
        let r_l = params.noise_limited_range() / 2.0;
        for seed in 0..10 {
            let p = sample(&GeneratorSpec::HomogeneousPoisson { intensity: 0.5 }, &w, &RandomStream::new(seed)).unwrap();
            assert_eq!(sinr_graph(&p, &p, &params).unwrap(), gilbert_graph(&p, r_l).unwrap());
            let mut last = usize::MAX;
            for gamma in [0.0, 0.001, 0.01, 0.05, 0.1, 1.0] {
                let e = sinr_graph(&p, &p, &exp_params(gamma)).unwrap().n_edges();
                assert!(e <= last);
                last = e;
            }
            let mut last = usize::MAX;
            for t in [0.5, 1.0, 2.0, 4.0] {
                let mut q = exp_params(0.01);
                q.threshold = t;
                let e = sinr_graph(&p, &p, &q).unwrap().n_edges();
                assert!(e <= last);
                last = e;
            }
            assert_eq!(sinr_graph(&p, &p, &exp_params(1e12)).unwrap().n_edges(), 0);
        }
    }

    #[test]
    fn sinr_interference_excludes_both_ends() {
        let p = line(&[0.0, 1.0]);
        let params = exp_params(1.0);
        // only x and y present: no interference
        let s = sinr(p.point(0), p.point(1), &p, &params);
        assert!((s - (-1.0f64).exp() / 0.1).abs() < 1e-12);
        let q = line(&[0.0, 1.0, 2.0]);
        let s = sinr(q.point(0), q.point(1), &q, &params);
        assert!((s - (-1.0f64).exp() / (0.1 + (-1.0f64).exp())).abs() < 1e-12);
    }

    #[test]
    fn sinr_parameter_checks() {
        let mut p = exp_params(0.0);
        p.attenuation = ResponseFunction::IndicatorBall { radius: 1.0 };
        assert!(p.validate(2).is_err());
        let mut p = exp_params(0.0);
        p.attenuation = ResponseFunction::PowerLaw { beta: 3.0, eps: 0.5 };
        assert!(p.validate(2).is_err());
        let mut p = exp_params(0.0);
        p.noise = 20.0;
        assert!(p.validate(2).is_err());
    }
}
