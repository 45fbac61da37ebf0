//! Random geometric graphs, U-statistics, induced subgraph counts and
//! clique / degree / chromatic statistics.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{Metric, PointPattern, Window};
use crate::percolation::{gilbert_graph, Graph};
use crate::procgen::GeneratorSpec;
use crate::stats::{check_reps, EstimateWithError};
use crate::stream::RandomStream;

pub const MAX_MOTIF_SIZE: usize = 5;
pub const DEFAULT_EXACT_CHROMATIC_LIMIT: usize = 60;
/// Search nodes allowed per exact colouring before falling back to the greedy bound.
const COLORING_NODE_BUDGET: u64 = 5_000_000;

/// Edge iff distance at most `r` (the Gilbert graph at radius `r / 2`).
pub fn rgg(pattern: &PointPattern, r: f64) -> Result<Graph> {
    gilbert_graph(pattern, r / 2.0)
}

/// Small connected graph on at most five vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Motif {
    k: usize,
    adjacency: Vec<Vec<bool>>,
    name: Option<String>,
}

fn bit(i: usize, j: usize) -> u32 {
    let (a, b) = (i.min(j), i.max(j));
    // index of (a, b) among pairs of a 5-vertex graph
    1 << (a * MAX_MOTIF_SIZE + b)
}

fn mask_of(k: usize, adj: impl Fn(usize, usize) -> bool) -> u32 {
    let mut m = 0;
    for i in 0..k {
        for j in i + 1..k {
            if adj(i, j) {
                m |= bit(i, j);
            }
        }
    }
    m
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// Smallest edge mask over all relabellings.
fn canonical(k: usize, adj: &impl Fn(usize, usize) -> bool, perms: &[Vec<usize>]) -> u32 {
    perms.iter().map(|p| mask_of(k, |i, j| adj(p[i], p[j]))).min().unwrap_or(0)
}

/// Whether each labelled `k`-vertex graph (indexed by its compact pair mask)
/// is isomorphic to `target`.
fn isomorphism_table(k: usize, target: u32, perms: &[Vec<usize>]) -> Vec<bool> {
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).collect();
    (0..1u32 << pairs.len())
        .map(|m| {
            let has = |i: usize, j: usize| {
                let (a, b) = (i.min(j), i.max(j));
                let idx = pairs.iter().position(|p| *p == (a, b)).unwrap();
                m >> idx & 1 == 1
            };
            canonical(k, &has, perms) == target
        })
        .collect()
}

fn compact_mask(k: usize, has: impl Fn(usize, usize) -> bool) -> usize {
    let mut m = 0;
    let mut idx = 0;
    for i in 0..k {
        for j in i + 1..k {
            if has(i, j) {
                m |= 1 << idx;
            }
            idx += 1;
        }
    }
    m
}

impl Motif {
    pub fn new(adjacency: Vec<Vec<bool>>, name: Option<String>) -> Result<Self> {
        let k = adjacency.len();
        if k == 0 || k > MAX_MOTIF_SIZE {
            return Err(Error::param("motif", format!("{k} vertices; motifs have 1 to {MAX_MOTIF_SIZE}")));
        }
        for (i, row) in adjacency.iter().enumerate() {
            if row.len() != k || row[i] {
                return Err(Error::param("motif", "adjacency must be square with a zero diagonal"));
            }
            if (0..k).any(|j| row[j] != adjacency[j][i]) {
                return Err(Error::param("motif", "adjacency must be symmetric"));
            }
        }
        let mut seen = vec![false; k];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for u in 0..k {
                if adjacency[v][u] && !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::param("motif", "must be connected"));
        }
        Ok(Motif { k, adjacency, name })
    }

    pub fn from_edges(k: usize, edges: &[(usize, usize)], name: &str) -> Result<Self> {
        let mut adj = vec![vec![false; k]; k];
        for &(a, b) in edges {
            if a >= k || b >= k || a == b {
                return Err(Error::param("motif", format!("bad edge ({a}, {b})")));
            }
            adj[a][b] = true;
            adj[b][a] = true;
        }
        Motif::new(adj, Some(name.to_string()))
    }

    /// edge, path3, triangle, star3, path4, cycle4, clique4.
    pub fn named(name: &str) -> Result<Self> {
        let (k, e): (usize, &[(usize, usize)]) = match name {
            "vertex" => (1, &[]),
            "edge" => (2, &[(0, 1)]),
            "path3" => (3, &[(0, 1), (1, 2)]),
            "triangle" => (3, &[(0, 1), (1, 2), (0, 2)]),
            "star3" => (4, &[(0, 1), (0, 2), (0, 3)]),
            "path4" => (4, &[(0, 1), (1, 2), (2, 3)]),
            "cycle4" => (4, &[(0, 1), (1, 2), (2, 3), (3, 0)]),
            "clique4" => (4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]),
            _ => return Err(Error::Parse(format!("unknown motif `{name}`"))),
        };
        Motif::from_edges(k, e, name)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn adjacency(&self) -> &[Vec<bool>] {
        &self.adjacency
    }

    fn canonical_mask(&self, perms: &[Vec<usize>]) -> u32 {
        canonical(self.k, &|i, j| self.adjacency[i][j], perms)
    }
}

/// Enumerates every connected induced `k`-vertex subgraph once (ESU).
fn for_each_connected_subset(adj: &[Vec<u32>], root: u32, k: usize, visit: &mut impl FnMut(&[u32])) {
    fn extend(
        adj: &[Vec<u32>],
        root: u32,
        k: usize,
        sub: &mut Vec<u32>,
        ext: Vec<u32>,
        visit: &mut impl FnMut(&[u32]),
    ) {
        if sub.len() == k {
            visit(sub);
            return;
        }
        let mut ext = ext;
        while let Some(w) = ext.pop() {
            // exclusive neighbours of w: above the root, not in or adjacent to the current subset
            let mut next = ext.clone();
            for &u in &adj[w as usize] {
                if u > root
                    && !sub.contains(&u)
                    && u != w
                    && !next.contains(&u)
                    && !sub.iter().any(|&s| adj[s as usize].binary_search(&u).is_ok())
                {
                    next.push(u);
                }
            }
            sub.push(w);
            extend(adj, root, k, sub, next, visit);
            sub.pop();
        }
    }
    let ext: Vec<u32> = adj[root as usize].iter().copied().filter(|&u| u > root).collect();
    extend(adj, root, k, &mut vec![root], ext, visit);
}

/// Number of `k`-vertex subsets whose induced subgraph is isomorphic to `motif`.
pub fn induced_subgraph_count(g: &Graph, motif: &Motif) -> Result<u64> {
    let k = motif.k();
    if k > MAX_MOTIF_SIZE {
        return Err(Error::param("motif", "too large"));
    }
    let adj = g.adjacency();
    let perms = permutations(k);
    let table = isomorphism_table(k, motif.canonical_mask(&perms), &perms);
    let count = (0..g.n_vertices() as u32)
        .into_par_iter()
        .map(|root| {
            let mut c = 0u64;
            for_each_connected_subset(&adj, root, k, &mut |sub| {
                let has = |i: usize, j: usize| adj[sub[i] as usize].binary_search(&sub[j]).is_ok();
                if table[compact_mask(k, has)] {
                    c += 1;
                }
            });
            c
        })
        .sum();
    Ok(count)
}

/// Number of connected induced subgraphs on `k` vertices, of any shape.
pub fn connected_subset_count(g: &Graph, k: usize) -> Result<u64> {
    if k == 0 || k > MAX_MOTIF_SIZE {
        return Err(Error::param("k", format!("{k} outside 1..={MAX_MOTIF_SIZE}")));
    }
    let adj = g.adjacency();
    Ok((0..g.n_vertices() as u32)
        .into_par_iter()
        .map(|root| {
            let mut c = 0u64;
            for_each_connected_subset(&adj, root, k, &mut |_| c += 1);
            c
        })
        .sum())
}

pub const MAX_U_ORDER: usize = 4;

fn for_each_subset(n: usize, k: usize, visit: &mut impl FnMut(&[usize])) {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, visit: &mut impl FnMut(&[usize])) {
        if cur.len() == k {
            visit(cur);
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, visit);
            cur.pop();
        }
    }
    rec(0, n, k, &mut Vec::with_capacity(k), visit);
}

fn check_u_order(k: usize) -> Result<()> {
    if k == 0 || k > MAX_U_ORDER {
        return Err(Error::param("k", format!("{k} outside 1..={MAX_U_ORDER}")));
    }
    Ok(())
}

/// `sum f(X_1, .., X_k)` over ordered `k`-tuples of distinct points, for a
/// symmetric `f`: `k!` times the sum over unordered subsets.
pub fn u_statistic(pattern: &PointPattern, k: usize, f: impl Fn(&[&[f64]]) -> f64) -> Result<f64> {
    check_u_order(k)?;
    let mut total = 0.0;
    let mut args: Vec<&[f64]> = Vec::with_capacity(k);
    for_each_subset(pattern.len(), k, &mut |s| {
        args.clear();
        args.extend(s.iter().map(|&i| pattern.point(i)));
        total += f(&args);
    });
    let factorial: f64 = (1..=k).map(|i| i as f64).product();
    Ok(factorial * total)
}

/// Values of `f` over unordered `k`-subsets, as a pattern on `[0, f_max)`.
pub fn u_statistic_pattern(pattern: &PointPattern, k: usize, f: impl Fn(&[&[f64]]) -> f64) -> Result<PointPattern> {
    check_u_order(k)?;
    let mut values = Vec::new();
    let mut args: Vec<&[f64]> = Vec::with_capacity(k);
    for_each_subset(pattern.len(), k, &mut |s| {
        args.clear();
        args.extend(s.iter().map(|&i| pattern.point(i)));
        values.push(f(&args));
    });
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::param("f", format!("value {v} is not finite and non-negative")));
    }
    let top = values.iter().copied().fold(0.0, f64::max);
    let upper = if top > 0.0 { top.next_up() } else { 1.0 };
    values.sort_by(f64::total_cmp);
    PointPattern::from_coords(Window::new(vec![0.0], vec![upper], Metric::Euclidean)?, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GraphStats {
    pub clique_number: usize,
    pub max_degree: usize,
    pub chromatic_number: usize,
    pub chromatic_exact: bool,
}

/// Greedy colouring in the given vertex order; returns the number of colours.
fn greedy_colors(adj: &[Vec<u32>], order: &[u32], colors: &mut [usize]) -> usize {
    let mut used = 0;
    let mut taken: Vec<bool> = Vec::new();
    for &v in order {
        taken.clear();
        taken.resize(used + 1, false);
        for &u in &adj[v as usize] {
            let c = colors[u as usize];
            if c != usize::MAX && c < taken.len() {
                taken[c] = true;
            }
        }
        let c = taken.iter().position(|t| !t).unwrap();
        colors[v as usize] = c;
        used = used.max(c + 1);
    }
    used
}

fn max_clique(adj: &[Vec<u32>]) -> usize {
    fn expand(adj: &[Vec<u32>], size: usize, cand: Vec<u32>, best: &mut usize) {
        if cand.is_empty() {
            *best = (*best).max(size);
            return;
        }
        // greedy colouring of the candidates bounds the clique they can add
        let mut color_of: Vec<(u32, usize)> = Vec::with_capacity(cand.len());
        let mut classes: Vec<Vec<u32>> = Vec::new();
        for &v in &cand {
            let c = classes
                .iter()
                .position(|cls| cls.iter().all(|&u| adj[v as usize].binary_search(&u).is_err()))
                .unwrap_or(classes.len());
            if c == classes.len() {
                classes.push(Vec::new());
            }
            classes[c].push(v);
        }
        for (c, cls) in classes.iter().enumerate() {
            for &v in cls {
                color_of.push((v, c + 1));
            }
        }
        let mut cand = cand;
        while let Some((v, bound)) = color_of.pop() {
            if size + bound <= *best {
                return;
            }
            let next: Vec<u32> = cand.iter().copied().filter(|&u| adj[v as usize].binary_search(&u).is_ok()).collect();
            expand(adj, size + 1, next, best);
            cand.retain(|&u| u != v);
        }
    }
    let n = adj.len();
    let mut best = if n > 0 { 1 } else { 0 };
    // degeneracy-style ordering: each vertex with its later neighbours
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by_key(|&v| adj[v as usize].len());
    let mut pos = vec![0; n];
    for (i, &v) in order.iter().enumerate() {
        pos[v as usize] = i;
    }
    for &v in &order {
        if adj[v as usize].len() < best {
            continue;
        }
        let later: Vec<u32> = adj[v as usize].iter().copied().filter(|&u| pos[u as usize] > pos[v as usize]).collect();
        expand(adj, 1, later, &mut best);
    }
    best
}

/// Exact chromatic number of a component by DSATUR branch and bound.
/// Returns `None` when the node budget runs out.
fn dsatur_exact(adj: &[Vec<u32>], vertices: &[u32], lower: usize, upper: usize) -> Option<usize> {
    if upper <= lower {
        return Some(upper);
    }
    let n = vertices.len();
    let mut local = vec![usize::MAX; adj.len()];
    for (i, &v) in vertices.iter().enumerate() {
        local[v as usize] = i;
    }
    let ladj: Vec<Vec<usize>> = vertices.iter().map(|&v| adj[v as usize].iter().map(|&u| local[u as usize]).collect()).collect();

    struct Search<'a> {
        ladj: &'a [Vec<usize>],
        colors: Vec<usize>,
        best: usize,
        lower: usize,
        nodes: u64,
    }
    impl Search<'_> {
        fn saturation(&self, v: usize) -> (usize, usize) {
            let mut seen = 0u128;
            let mut uncolored = 0;
            for &u in &self.ladj[v] {
                match self.colors[u] {
                    usize::MAX => uncolored += 1,
                    c => seen |= 1 << c,
                }
            }
            (seen.count_ones() as usize, uncolored)
        }

        fn run(&mut self, colored: usize, used: usize) -> bool {
            self.nodes += 1;
            if self.nodes > COLORING_NODE_BUDGET {
                return false;
            }
            if used >= self.best {
                return true;
            }
            if colored == self.colors.len() {
                self.best = used;
                return true;
            }
            let v = (0..self.colors.len())
                .filter(|&v| self.colors[v] == usize::MAX)
                .max_by_key(|&v| {
                    let (s, d) = self.saturation(v);
                    (s, d, usize::MAX - v)
                })
                .unwrap();
            let mut forbidden = 0u128;
            for &u in &self.ladj[v] {
                if self.colors[u] != usize::MAX {
                    forbidden |= 1 << self.colors[u];
                }
            }
            for c in 0..=used.min(self.best - 1) {
                if forbidden >> c & 1 == 1 {
                    continue;
                }
                if c == used && used + 1 >= self.best {
                    break;
                }
                self.colors[v] = c;
                let ok = self.run(colored + 1, used.max(c + 1));
                self.colors[v] = usize::MAX;
                if !ok {
                    return false;
                }
                if self.best <= self.lower {
                    return true;
                }
            }
            true
        }
    }
    let mut s = Search {
        ladj: &ladj,
        colors: vec![usize::MAX; n],
        best: upper,
        lower,
        nodes: 0,
    };
    s.run(0, 0).then_some(s.best)
}

/// Clique number, maximum degree and chromatic number. The chromatic number
/// is exact when every component has at most `exact_chromatic_limit`
/// vertices (capped at 128) or when the greedy bound meets the clique number.
pub fn graph_stats(g: &Graph, exact_chromatic_limit: usize) -> GraphStats {
    let adj = g.adjacency();
    let n = g.n_vertices();
    let max_degree = adj.iter().map(|a| a.len()).max().unwrap_or(0);
    let clique_number = max_clique(&adj);
    let limit = exact_chromatic_limit.min(128);

    let mut uf = crate::percolation::UnionFind::new(n);
    for &(a, b) in g.edges() {
        uf.union(a, b);
    }
    let mut members: std::collections::BTreeMap<u32, Vec<u32>> = Default::default();
    for v in 0..n as u32 {
        members.entry(uf.find(v)).or_default().push(v);
    }
    let mut chromatic = 0;
    let mut exact = true;
    for comp in members.values() {
        // largest-first greedy upper bound
        let mut order = comp.clone();
        order.sort_by_key(|&v| (std::cmp::Reverse(adj[v as usize].len()), v));
        let mut colors = vec![usize::MAX; n];
        let greedy = greedy_colors(&adj, &order, &mut colors);
        if greedy <= chromatic {
            continue;
        }
        let sub_clique = if comp.len() == 1 { 1 } else { 2 };
        let lower = sub_clique.max(chromatic);
        let value = if comp.len() <= limit {
            dsatur_exact(&adj, comp, lower, greedy)
        } else {
            None
        };
        match value {
            Some(c) => chromatic = chromatic.max(c),
            None => {
                chromatic = chromatic.max(greedy);
                exact = false;
            }
        }
    }
    if !exact && chromatic <= clique_number {
        exact = true;
    }
    let chromatic_number = chromatic.max(clique_number);
    assert!(clique_number <= chromatic_number && chromatic_number <= max_degree + 1 || n == 0);
    GraphStats {
        clique_number,
        max_degree,
        chromatic_number,
        chromatic_exact: exact,
    }
}

/// `r_n = scale * n^exponent`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusRule {
    pub scale: f64,
    pub exponent: f64,
}

impl RadiusRule {
    pub fn constant(r: f64) -> Self {
        RadiusRule { scale: r, exponent: 0.0 }
    }

    pub fn radius(&self, n: usize) -> f64 {
        self.scale * (n as f64).powf(self.exponent)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale.is_finite() && self.scale > 0.0 && self.exponent.is_finite()) {
            return Err(Error::param("radius_rule", "scale must be positive and exponent finite"));
        }
        Ok(())
    }
}

/// Averages over replications for one window size.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub n: usize,
    pub radius: f64,
    pub points: EstimateWithError,
    pub edges: EstimateWithError,
    pub clique_number: EstimateWithError,
    pub max_degree: EstimateWithError,
    pub chromatic_number: EstimateWithError,
    /// Fraction of replications where the chromatic number was exact.
    pub chromatic_exact: f64,
    /// `(k, P(clique number < k))`.
    pub clique_below: Vec<(usize, EstimateWithError)>,
}

/// Euclidean cube `[-n^(1/d)/2, n^(1/d)/2]^d` of volume `n`.
pub fn scaling_window(n: usize, d: usize) -> Result<Window> {
    if n == 0 {
        return Err(Error::param("n", "must be positive"));
    }
    Window::centered_cube(d, (n as f64).powf(1.0 / d as f64), Metric::Euclidean)
}

/// For each `n`: sample on the window of volume `n`, build the geometric
/// graph at `r_n`, and record clique, degree and chromatic statistics.
#[allow(clippy::too_many_arguments)]
pub fn scaling_experiment(
    spec: &GeneratorSpec,
    d: usize,
    rule: RadiusRule,
    n_list: &[usize],
    ks: &[usize],
    exact_chromatic_limit: usize,
    reps: usize,
    stream: &RandomStream,
) -> Result<Vec<ScalingRow>> {
    check_reps(reps)?;
    rule.validate()?;
    let mut rows = Vec::with_capacity(n_list.len());
    for (i, &n) in n_list.iter().enumerate() {
        let w = scaling_window(n, d)?;
        let sampler = spec.sampler(&w)?;
        let r = rule.radius(n);
        let st = stream.derive(i as u64);
        let per: Vec<(usize, usize, GraphStats)> = crate::stats::try_replicate(reps, &st, |_, s| {
            let p = sampler.sample(&s);
            let g = rgg(&p, r)?;
            Ok((p.len(), g.n_edges(), graph_stats(&g, exact_chromatic_limit)))
        })?;
        let est = |f: &dyn Fn(&(usize, usize, GraphStats)) -> f64| EstimateWithError::from_samples(&per.iter().map(f).collect::<Vec<_>>());
        rows.push(ScalingRow {
            n,
            radius: r,
            points: est(&|t| t.0 as f64),
            edges: est(&|t| t.1 as f64),
            clique_number: est(&|t| t.2.clique_number as f64),
            max_degree: est(&|t| t.2.max_degree as f64),
            chromatic_number: est(&|t| t.2.chromatic_number as f64),
            chromatic_exact: per.iter().filter(|t| t.2.chromatic_exact).count() as f64 / reps as f64,
            clique_below: ks.iter().map(|&k| (k, est(&|t| (t.2.clique_number < k) as u8 as f64))).collect(),
        });
    }
    Ok(rows)
}

/// Mean number of induced copies of `motif` in the geometric graph at radius `r`.
pub fn mean_motif_count(
    spec: &GeneratorSpec,
    w: &Window,
    r: f64,
    motif: &Motif,
    reps: usize,
    stream: &RandomStream,
) -> Result<EstimateWithError> {
    check_reps(reps)?;
    let sampler = spec.sampler(w)?;
    let counts = crate::stats::try_replicate(reps, stream, |_, st| Ok(induced_subgraph_count(&rgg(&sampler.sample(&st), r)?, motif)? as f64))?;
    Ok(EstimateWithError::from_samples(&counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::procgen::sample;

    fn line(xs: &[f64]) -> PointPattern {
        let w = Window::new(vec![-10.0, -10.0], vec![10.0, 10.0], Metric::Euclidean).unwrap();
        PointPattern::from_coords(w, xs.iter().flat_map(|x| [*x, 0.0]).collect()).unwrap()
    }

    fn random(n: u64, side: f64, seed: u64) -> PointPattern {
        let w = Window::cube(2, side, Metric::Euclidean).unwrap();
        sample(&GeneratorSpec::BinomialProcess { count: n }, &w, &RandomStream::new(seed)).unwrap()
    }

    fn cycle(n: u32) -> Graph {
        Graph::new(n as usize, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    #[test]
    fn rgg_examples() {
        let p = line(&[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(rgg(&p, 1.0).unwrap().edges(), &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!(rgg(&p, 0.9).unwrap().n_edges(), 0);
        let q = random(40, 5.0, 1);
        assert_eq!(rgg(&q, 1.3).unwrap(), gilbert_graph(&q, 0.65).unwrap());
    }

    #[test]
    fn motif_validation() {
        assert!(Motif::new(vec![vec![false; 6]; 6], None).is_err());
        assert!(Motif::from_edges(3, &[(0, 1)], "disconnected").is_err());
        assert!(Motif::named("pentagon").is_err());
        for name in ["edge", "path3", "triangle", "star3", "path4", "cycle4", "clique4"] {
            assert_eq!(Motif::named(name).unwrap().name(), Some(name));
        }
    }

    #[test]
    fn subgraph_examples() {
        let tri = Graph::complete(3);
        assert_eq!(induced_subgraph_count(&tri, &Motif::named("edge").unwrap()).unwrap(), 3);
        let path = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(induced_subgraph_count(&path, &Motif::named("triangle").unwrap()).unwrap(), 0);
        assert_eq!(induced_subgraph_count(&path, &Motif::named("path3").unwrap()).unwrap(), 1);
        // induced: K4 has four triangles and no induced 4-cycle
        let k4 = Graph::complete(4);
        assert_eq!(induced_subgraph_count(&k4, &Motif::named("triangle").unwrap()).unwrap(), 4);
        assert_eq!(induced_subgraph_count(&k4, &Motif::named("cycle4").unwrap()).unwrap(), 0);
        assert_eq!(induced_subgraph_count(&cycle(4), &Motif::named("cycle4").unwrap()).unwrap(), 1);
        assert_eq!(induced_subgraph_count(&cycle(5), &Motif::named("path4").unwrap()).unwrap(), 5);
    }

    fn brute_count(g: &Graph, motif: &Motif) -> u64 {
        let perms = permutations(motif.k());
        let target = motif.canonical_mask(&perms);
        let mut memo = std::collections::HashMap::new();
        let mut c = 0;
        for_each_subset(g.n_vertices(), motif.k(), &mut |s| {
            let has = |i: usize, j: usize| g.has_edge(s[i] as u32, s[j] as u32);
            let labelled = mask_of(motif.k(), has);
            if *memo.entry(labelled).or_insert_with(|| canonical(motif.k(), &has, &perms)) == target {
                c += 1;
            }
        });
        c
    }

    #[test]
    fn subgraph_counts_match_exhaustive_enumeration() {
        for seed in 0..5 {
            let p = random(30, 5.0, seed);
            let g = rgg(&p, 1.4).unwrap();
            for name in ["edge", "path3", "triangle", "star3", "path4", "cycle4", "clique4"] {
                let m = Motif::named(name).unwrap();
                assert_eq!(induced_subgraph_count(&g, &m).unwrap(), brute_count(&g, &m), "{name}");
            }
            let m = Motif::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 4)], "path5").unwrap();
            assert_eq!(induced_subgraph_count(&g, &m).unwrap(), brute_count(&g, &m));
            // the two connected 3-vertex shapes partition connected triples
            let three = induced_subgraph_count(&g, &Motif::named("path3").unwrap()).unwrap()
                + induced_subgraph_count(&g, &Motif::named("triangle").unwrap()).unwrap();
            assert_eq!(three, connected_subset_count(&g, 3).unwrap());
            assert_eq!(induced_subgraph_count(&g, &Motif::named("edge").unwrap()).unwrap(), g.n_edges() as u64);
        }
    }

    #[test]
    fn u_statistics() {
        let p = random(12, 3.0, 2);
        let w = p.window().clone();
        assert_eq!(u_statistic(&p, 1, |_| 1.0).unwrap(), 12.0);
        let r = 1.1;
        let close = |x: &[&[f64]]| (w.dist(x[0], x[1]) <= r) as u8 as f64;
        assert_eq!(u_statistic(&p, 2, close).unwrap(), 2.0 * rgg(&p, r).unwrap().n_edges() as f64);
        // perimeter of triangles, against a direct ordered triple loop
        let f = |x: &[&[f64]]| w.dist(x[0], x[1]) + w.dist(x[1], x[2]) + w.dist(x[0], x[2]);
        let mut direct = 0.0;
        for i in 0..12 {
            for j in 0..12 {
                for k in 0..12 {
                    if i != j && j != k && i != k {
                        direct += f(&[p.point(i), p.point(j), p.point(k)]);
                    }
                }
            }
        }
        let u = u_statistic(&p, 3, f).unwrap();
        assert!((u - direct).abs() <= 1e-12 * direct);
        assert!(u_statistic(&p, 5, |_| 1.0).is_err());
    }

    #[test]
    fn u_statistic_patterns() {
        let p = line(&[0.0, 1.0, 2.0]);
        let w = p.window().clone();
        let dist = |x: &[&[f64]]| w.dist(x[0], x[1]);
        let eta = u_statistic_pattern(&p, 2, dist).unwrap();
        assert_eq!(eta.coords(), &[1.0, 1.0, 2.0]);
        assert_eq!(u_statistic_pattern(&line(&[0.0]), 2, dist).unwrap().len(), 0);
        let q = random(9, 3.0, 3);
        let w = q.window().clone();
        assert_eq!(u_statistic_pattern(&q, 3, |x| w.dist(x[0], x[2])).unwrap().len(), 84);
    }

    #[test]
    fn stats_examples() {
        let s = graph_stats(&Graph::complete(3), 60);
        assert_eq!((s.clique_number, s.max_degree, s.chromatic_number, s.chromatic_exact), (3, 2, 3, true));
        let s = graph_stats(&Graph::empty(5), 60);
        assert_eq!((s.clique_number, s.max_degree, s.chromatic_number, s.chromatic_exact), (1, 0, 1, true));
        let s = graph_stats(&cycle(5), 60);
        assert_eq!((s.clique_number, s.max_degree, s.chromatic_number, s.chromatic_exact), (2, 2, 3, true));
        assert_eq!(graph_stats(&cycle(6), 60).chromatic_number, 2);
        assert_eq!(graph_stats(&Graph::empty(0), 60).chromatic_number, 0);
        // Mycielski graph of C5 (Groetzsch): triangle-free with chromatic number 4
        let mut e: Vec<(u32, u32)> = (0..5).map(|i| (i, (i + 1) % 5)).collect();
        for i in 0..5u32 {
            e.push((5 + i, (i + 1) % 5));
            e.push((5 + i, (i + 4) % 5));
            e.push((5 + i, 10));
        }
        let s = graph_stats(&Graph::new(11, e).unwrap(), 60);
        assert_eq!((s.clique_number, s.chromatic_number, s.chromatic_exact), (2, 4, true));
    }

    fn brute_chromatic(g: &Graph) -> usize {
        let n = g.n_vertices();
        for k in 1..=n {
            let mut colors = vec![0usize; n];
            loop {
                if g.edges().iter().all(|&(a, b)| colors[a as usize] != colors[b as usize]) {
                    return k;
                }
                let mut i = 0;
                while i < n {
                    colors[i] += 1;
                    if colors[i] < k {
                        break;
                    }
                    colors[i] = 0;
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
        }
        0
    }

    fn brute_clique(g: &Graph) -> usize {
        let n = g.n_vertices();
        (0..1u32 << n)
            .filter(|m| {
                (0..n).all(|i| (0..i).all(|j| m >> i & 1 == 0 || m >> j & 1 == 0 || g.has_edge(i as u32, j as u32)))
            })
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap_or(0)
    }

    #[test]
    fn stats_match_brute_force_on_small_graphs() {
        for seed in 0..12 {
            let p = random(9, 2.0, 10 + seed);
            for r in [0.5, 0.8, 1.2] {
                let g = rgg(&p, r).unwrap();
                let s = graph_stats(&g, 60);
                assert_eq!(s.clique_number, brute_clique(&g));
                assert_eq!(s.chromatic_number, brute_chromatic(&g));
                assert!(s.chromatic_exact);
            }
        }
    }

    #[test]
    fn sandwich_on_large_graphs() {
        let p = random(400, 10.0, 4);
        let g = rgg(&p, 1.2).unwrap();
        let s = graph_stats(&g, 60);
        assert!(s.clique_number <= s.chromatic_number && s.chromatic_number <= s.max_degree + 1);
        let coarse = graph_stats(&g, 1);
        assert!(coarse.chromatic_number >= s.chromatic_number);
    }

    #[test]
    fn scaling_regimes() {
        let poisson = GeneratorSpec::HomogeneousPoisson { intensity: 1.0 };
        let rows = scaling_experiment(&poisson, 2, RadiusRule { scale: 1.0, exponent: -1.0 }, &[10, 100, 1000], &[2], 60, 100, &RandomStream::new(5)).unwrap();
        let p: Vec<f64> = rows.iter().map(|r| r.clique_below[0].1.value).collect();
        assert!(p[2] >= 0.95, "{p:?}");
        let full = scaling_experiment(&poisson, 2, RadiusRule::constant(100.0), &[20], &[], 60, 5, &RandomStream::new(5)).unwrap();
        assert_eq!(full[0].clique_number.value, full[0].points.value);
    }
}
