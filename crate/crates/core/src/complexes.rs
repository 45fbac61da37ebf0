//! Vietoris-Rips and Čech complexes, simplex counts, Z/2 Betti numbers and
//! Euler characteristics.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{Metric, PointPattern};
use crate::graphs::{scaling_window, RadiusRule};
use crate::percolation::gilbert_graph;
use crate::procgen::GeneratorSpec;
use crate::stats::{check_reps, try_replicate, EstimateWithError};
use crate::stream::RandomStream;

pub const MAX_COMPLEX_DIM: usize = 4;
/// Points this close to a ball boundary count as inside.
pub const MINIBALL_TOLERANCE: f64 = 1e-12;

/// Faces per dimension, each an ascending vertex tuple, sorted lexicographically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimplicialComplex {
    max_dim: usize,
    faces: Vec<Vec<Vec<u32>>>,
}

impl SimplicialComplex {
    /// Builds from arbitrary faces, adding nothing: the input must be downward closed.
    pub fn new(max_dim: usize, faces: Vec<Vec<Vec<u32>>>) -> Result<Self> {
        if faces.len() != max_dim + 1 {
            return Err(Error::param("faces", "need one face list per dimension"));
        }
        let mut faces = faces;
        for (k, list) in faces.iter_mut().enumerate() {
            for f in list.iter_mut() {
                f.sort_unstable();
                if f.len() != k + 1 || f.windows(2).any(|w| w[0] == w[1]) {
                    return Err(Error::param("faces", format!("{f:?} is not a {k}-face")));
                }
            }
            list.sort();
            list.dedup();
        }
        let c = SimplicialComplex { max_dim, faces };
        c.check_closure()?;
        Ok(c)
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn faces(&self, k: usize) -> &[Vec<u32>] {
        self.faces.get(k).map(|f| &f[..]).unwrap_or(&[])
    }

    /// True when no face reaches `max_dim`, so no larger faces were cut off.
    pub fn is_full(&self) -> bool {
        self.faces[self.max_dim].is_empty()
    }

    /// Every facet of every face is present.
    pub fn check_closure(&self) -> Result<()> {
        for k in 1..=self.max_dim {
            for f in &self.faces[k] {
                for skip in 0..f.len() {
                    let facet: Vec<u32> = f.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| *v).collect();
                    if self.faces[k - 1].binary_search(&facet).is_err() {
                        return Err(Error::param("faces", format!("{f:?} is missing its facet {facet:?}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Per-dimension face list as CSV `dim,v0,v1,..`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("dim,vertices\n");
        for (k, list) in self.faces.iter().enumerate() {
            for f in list {
                let v: Vec<String> = f.iter().map(|x| x.to_string()).collect();
                s.push_str(&format!("{k},{}\n", v.join(" ")));
            }
        }
        s
    }
}

fn check_max_dim(max_dim: usize) -> Result<()> {
    if max_dim > MAX_COMPLEX_DIM {
        return Err(Error::param("max_dim", format!("{max_dim} exceeds {MAX_COMPLEX_DIM}")));
    }
    Ok(())
}

/// Grows faces one vertex at a time; `accept` decides whether an extension is a face.
fn expand(pattern: &PointPattern, r: f64, max_dim: usize, accept: impl Fn(&[u32]) -> bool) -> Result<SimplicialComplex> {
    check_max_dim(max_dim)?;
    let n = pattern.len() as u32;
    let g = gilbert_graph(pattern, r)?;
    let adj = g.adjacency();
    let mut faces: Vec<Vec<Vec<u32>>> = vec![(0..n).map(|v| vec![v]).collect()];
    for _ in 1..=max_dim {
        let prev = faces.last().unwrap();
        let mut next = Vec::new();
        for f in prev {
            let last = *f.last().unwrap();
            // common neighbours above the last vertex
            for &u in adj[f[0] as usize].iter().filter(|&&u| u > last) {
                if f[1..].iter().all(|&v| adj[v as usize].binary_search(&u).is_ok()) {
                    let mut cand = f.clone();
                    cand.push(u);
                    if accept(&cand) {
                        next.push(cand);
                    }
                }
            }
        }
        next.sort();
        faces.push(next);
    }
    let c = SimplicialComplex { max_dim, faces };
    debug_assert!(c.check_closure().is_ok());
    Ok(c)
}

/// Clique complex of the Gilbert graph at radius `r` (pairwise distances at most `2r`).
pub fn vietoris_rips(pattern: &PointPattern, r: f64, max_dim: usize) -> Result<SimplicialComplex> {
    expand(pattern, r, max_dim, |_| true)
}

/// Circumcentre of the points within their affine hull, or `None` if degenerate.
fn circumcenter(pts: &[&[f64]]) -> Option<Vec<f64>> {
    let p0 = pts[0];
    let m = pts.len() - 1;
    if m == 0 {
        return Some(p0.to_vec());
    }
    let d = p0.len();
    let diffs: Vec<Vec<f64>> = pts[1..].iter().map(|p| (0..d).map(|a| p[a] - p0[a]).collect()).collect();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let gram = DMatrix::from_fn(m, m, |i, j| 2.0 * dot(&diffs[i], &diffs[j]));
    let rhs = DVector::from_fn(m, |i, _| dot(&diffs[i], &diffs[i]));
    let scale = gram.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let lu = gram.lu();
    if lu.determinant().abs() <= 1e-12 * scale.powi(m as i32) {
        return None;
    }
    let coef = lu.solve(&rhs)?;
    Some((0..d).map(|a| p0[a] + (0..m).map(|i| coef[i] * diffs[i][a]).sum::<f64>()).collect())
}

/// Radius of the smallest ball enclosing the points: the smallest
/// circumsphere over support subsets that encloses every point.
pub fn miniball_radius(pts: &[&[f64]]) -> f64 {
    let n = pts.len();
    if n <= 1 {
        return 0.0;
    }
    let d = pts[0].len();
    let dist2 = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
    let mut best = f64::INFINITY;
    for mask in 1u32..(1 << n) {
        let size = mask.count_ones() as usize;
        if size < 2 || size > d + 1 {
            continue;
        }
        let support: Vec<&[f64]> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| pts[i]).collect();
        let Some(c) = circumcenter(&support) else { continue };
        let r2 = dist2(&c, support[0]);
        if r2.sqrt() >= best {
            continue;
        }
        let slack = MINIBALL_TOLERANCE * (1.0 + r2.sqrt());
        if pts.iter().all(|p| dist2(&c, p).sqrt() <= r2.sqrt() + slack) {
            best = r2.sqrt();
        }
    }
    best
}

/// Faces are vertex sets whose balls of radius `r` share a point, i.e. whose
/// smallest enclosing ball has radius at most `r`. Euclidean windows only.
pub fn cech_complex(pattern: &PointPattern, r: f64, max_dim: usize) -> Result<SimplicialComplex> {
    if pattern.window().metric() == Metric::Periodic {
        return Err(Error::Unsupported("Čech complexes need a Euclidean window".into()));
    }
    expand(pattern, r, max_dim, |f| {
        let pts: Vec<&[f64]> = f.iter().map(|&v| pattern.point(v as usize)).collect();
        miniball_radius(&pts) <= r + MINIBALL_TOLERANCE
    })
}

/// Face counts `S_0 .. S_max_dim`; a single `0` for an empty complex.
pub fn simplex_counts(c: &SimplicialComplex) -> Vec<usize> {
    if c.faces[0].is_empty() {
        return vec![0];
    }
    c.faces.iter().map(|f| f.len()).collect()
}

pub fn euler_characteristic(c: &SimplicialComplex) -> i64 {
    c.faces.iter().enumerate().map(|(k, f)| if k % 2 == 0 { f.len() as i64 } else { -(f.len() as i64) }).sum()
}

/// Rank over Z/2 of the boundary map from `k`-faces to `(k-1)`-faces, by
/// column reduction on sparse columns.
pub fn boundary_rank(c: &SimplicialComplex, k: usize) -> usize {
    if k == 0 || k > c.max_dim {
        return 0;
    }
    let lower = &c.faces[k - 1];
    let mut pivots: std::collections::HashMap<u32, Vec<u32>> = Default::default();
    let mut rank = 0;
    for f in &c.faces[k] {
        let mut col: Vec<u32> = (0..f.len())
            .map(|skip| {
                let facet: Vec<u32> = f.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, v)| *v).collect();
                lower.binary_search(&facet).unwrap() as u32
            })
            .collect();
        col.sort_unstable();
        while let Some(&low) = col.last() {
            match pivots.get(&low) {
                Some(other) => col = symmetric_difference(&col, other),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            pivots.insert(low, col);
            rank += 1;
        }
    }
    rank
}

fn symmetric_difference(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Betti numbers `beta_0 ..` over Z/2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BettiVector {
    pub betti: Vec<usize>,
}

/// `beta_k = S_k - rank d_k - rank d_(k+1)`; needs faces up to dimension `k + 1`
/// unless the complex is full.
pub fn betti(c: &SimplicialComplex, k: usize) -> Result<usize> {
    if k >= c.max_dim && !(c.is_full() && k <= c.max_dim) {
        return Err(Error::param("k", format!("beta_{k} needs a complex built to dimension {}", k + 1)));
    }
    let s = c.faces[k].len();
    Ok(s - boundary_rank(c, k) - boundary_rank(c, k + 1))
}

/// `beta_0 .. beta_(max_dim - 1)`, or up to `beta_max_dim` for a full complex.
pub fn betti_numbers(c: &SimplicialComplex) -> Result<BettiVector> {
    let top = if c.is_full() { c.max_dim } else { c.max_dim.checked_sub(1).ok_or_else(|| {
        Error::param("max_dim", "Betti numbers need a complex built to dimension at least 1")
    })? };
    Ok(BettiVector {
        betti: (0..=top).map(|k| betti(c, k)).collect::<Result<_>>()?,
    })
}

/// One row of a Betti scaling experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct BettiRow {
    pub n: usize,
    pub radius: f64,
    pub mean_betti: EstimateWithError,
    pub p_zero: EstimateWithError,
}

/// For each `n`: sample on the Euclidean window of volume `n`, build the
/// Čech complex at `r_n` to dimension `k + 1` and record `beta_k`.
pub fn betti_scaling_experiment(
    spec: &GeneratorSpec,
    d: usize,
    rule: RadiusRule,
    n_list: &[usize],
    k: usize,
    reps: usize,
    stream: &RandomStream,
) -> Result<Vec<BettiRow>> {
    check_reps(reps)?;
    rule.validate()?;
    if k > 2 {
        return Err(Error::param("k", "Betti scaling runs for k <= 2"));
    }
    n_list
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let w = scaling_window(n, d)?;
            let sampler = spec.sampler(&w)?;
            let r = rule.radius(n);
            let b: Vec<f64> = try_replicate(reps, &stream.derive(i as u64), |_, st| {
                let c = cech_complex(&sampler.sample(&st), r, k + 1)?;
                Ok(betti(&c, k)? as f64)
            })?;
            let zero: Vec<f64> = b.iter().map(|x| (*x == 0.0) as u8 as f64).collect();
            Ok(BettiRow {
                n,
                radius: r,
                mean_betti: EstimateWithError::from_samples(&b),
                p_zero: EstimateWithError::from_samples(&zero),
            })
        })
        .collect()
}
