//! Pattern files.
//!
//! A pattern is stored as CSV with header `x0,x1,...` and one point per
//! row. Its sidecar is a `key = value` text file:
//!
//! ```text
//! # ppclust pattern metadata
//! spec = poisson(intensity=1)
//! lower = 0,0
//! upper = 10,10
//! metric = periodic
//! seed = 42
//! path = 0
//! points = 97
//! ```
//!
//! Lines starting with `#` are comments; `path` is the comma-separated
//! stream path (empty for the root stream).

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::geometry::{Metric, PointPattern, Window};
use crate::textio::{fmt_f64, parse_f64};

pub fn write_pattern_csv<W: Write>(p: &PointPattern, mut out: W) -> Result<()> {
    let header: Vec<String> = (0..p.dim()).map(|i| format!("x{i}")).collect();
    writeln!(out, "{}", header.join(","))?;
    for x in p.points() {
        let row: Vec<String> = x.iter().map(|v| fmt_f64(*v)).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

/// Reads a CSV written by [`write_pattern_csv`]; every point must lie in `w`.
pub fn read_pattern_csv<R: BufRead>(input: R, w: &Window) -> Result<PointPattern> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty pattern file".into()))??;
    let d = header.split(',').count();
    if d != w.dim() {
        return Err(Error::DimensionMismatch { expected: w.dim(), got: d });
    }
    let mut coords = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<&str> = line.split(',').collect();
        if row.len() != d {
            return Err(Error::Parse(format!("row {} has {} fields, expected {d}", i + 2, row.len())));
        }
        for f in row {
            coords.push(parse_f64(f).ok_or_else(|| Error::Parse(format!("row {}: bad number `{f}`", i + 2)))?);
        }
    }
    PointPattern::from_coords(w.clone(), coords)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternMetadata {
    pub spec: String,
    pub window: Window,
    pub seed: u64,
    pub path: Vec<u64>,
    pub points: usize,
}

impl PatternMetadata {
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",");
        let path: Vec<String> = self.path.iter().map(u64::to_string).collect();
        format!(
            "# ppclust pattern metadata\nspec = {}\nlower = {}\nupper = {}\nmetric = {}\nseed = {}\npath = {}\npoints = {}\n",
            self.spec,
            join(self.window.lower()),
            join(self.window.upper()),
            self.window.metric(),
            self.seed,
            path.join(","),
            self.points
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut spec = None;
        let (mut lower, mut upper, mut metric) = (None, None, Metric::Euclidean);
        let (mut seed, mut path, mut points) = (None, Vec::new(), 0);
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", n + 1)))?;
            let (k, v) = (k.trim(), v.trim());
            let bad = |what: &str| Error::Parse(format!("line {}: bad {what} `{v}`", n + 1));
            let floats = |v: &str| v.split(',').map(parse_f64).collect::<Option<Vec<f64>>>();
            match k {
                "spec" => spec = Some(v.to_string()),
                "lower" => lower = Some(floats(v).ok_or_else(|| bad("lower"))?),
                "upper" => upper = Some(floats(v).ok_or_else(|| bad("upper"))?),
                "metric" => metric = v.parse()?,
                "seed" => seed = Some(v.parse().map_err(|_| bad("seed"))?),
                "path" => {
                    path = if v.is_empty() {
                        Vec::new()
                    } else {
                        v.split(',').map(|s| s.trim().parse()).collect::<std::result::Result<_, _>>().map_err(|_| bad("path"))?
                    }
                }
                "points" => points = v.parse().map_err(|_| bad("points"))?,
                other => return Err(Error::Parse(format!("line {}: unknown key `{other}`", n + 1))),
            }
        }
        let missing = |k: &str| Error::Parse(format!("metadata is missing `{k}`"));
        Ok(Self {
            spec: spec.ok_or_else(|| missing("spec"))?,
            window: Window::new(lower.ok_or_else(|| missing("lower"))?, upper.ok_or_else(|| missing("upper"))?, metric)?,
            seed: seed.ok_or_else(|| missing("seed"))?,
            path,
            points,
        })
    }
}
