//! Shot-noise and coverage fields, k-coverage volumes and the Chernoff
//! bounds on level sets of additive shot-noise.

use std::fmt;
use std::str::FromStr;

use crate::dists::CountDistribution;
use crate::expr::{call, Args, Expr};
use crate::error::{Error, Result};
use crate::geometry::{unit_ball_volume_unchecked, CellGridSpec, Point, PointPattern, Window, DEFAULT_MAX_GRID_CELLS};
use crate::procgen::{GeneratorSpec, MixingLaw};
use crate::spatial::NeighborIndex;
use crate::stats::{check_reps, replicate, EstimateWithError};
use crate::stream::RandomStream;

/// Radial response `h(x, y) = h(|x - y|)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ResponseFunction {
    IndicatorBall { radius: f64 },
    /// `exp(-beta r)`
    Exponential { beta: f64 },
    /// `(eps + r)^(-beta)`, integrable for `beta > d`; unbounded when `eps = 0`.
    PowerLaw { beta: f64, eps: f64 },
    /// Piecewise-linear interpolation of `(radius, value)` knots, zero past the last knot.
    Tabulated { radii: Vec<f64>, values: Vec<f64> },
}

impl ResponseFunction {
    pub fn indicator_ball(radius: f64) -> Result<Self> {
        let h = ResponseFunction::IndicatorBall { radius };
        h.validate(1)?;
        Ok(h)
    }

    /// Checks parameters and integrability in dimension `d`.
    pub fn validate(&self, d: usize) -> Result<()> {
        match self {
            ResponseFunction::IndicatorBall { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::param("radius", format!("{radius} must be positive")));
                }
            }
            ResponseFunction::Exponential { beta } => {
                if !(beta.is_finite() && *beta > 0.0) {
                    return Err(Error::param("beta", format!("{beta} must be positive")));
                }
            }
            ResponseFunction::PowerLaw { beta, eps } => {
                if !(beta.is_finite() && *beta > d as f64) {
                    return Err(Error::NonIntegrable(format!("power law with beta = {beta} <= d = {d}")));
                }
                if !(eps.is_finite() && *eps >= 0.0) {
                    return Err(Error::param("eps", format!("{eps} must be non-negative")));
                }
            }
            ResponseFunction::Tabulated { radii, values } => {
                if radii.len() != values.len() || radii.is_empty() {
                    return Err(Error::param("tabulated", "need equally many radii and values"));
                }
                crate::stats::check_increasing("radii", radii)?;
                if radii[0] != 0.0 {
                    return Err(Error::param("radii", "first knot must be at radius 0"));
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(Error::param("values", "must be finite and non-negative"));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, r: f64) -> f64 {
        match self {
            ResponseFunction::IndicatorBall { radius } => (r <= *radius) as u8 as f64,
            ResponseFunction::Exponential { beta } => (-beta * r).exp(),
            ResponseFunction::PowerLaw { beta, eps } => (eps + r).powf(-beta),
            ResponseFunction::Tabulated { radii, values } => {
                let n = radii.len();
                if r >= radii[n - 1] {
                    return if r == radii[n - 1] { values[n - 1] } else { 0.0 };
                }
                let i = radii.partition_point(|x| *x <= r) - 1;
                let t = (r - radii[i]) / (radii[i + 1] - radii[i]);
                values[i] + t * (values[i + 1] - values[i])
            }
        }
    }

    /// Radius beyond which the response vanishes, if any.
    pub fn support_radius(&self) -> Option<f64> {
        match self {
            ResponseFunction::IndicatorBall { radius } => Some(*radius),
            ResponseFunction::Tabulated { radii, .. } => Some(radii[radii.len() - 1]),
            _ => None,
        }
    }

    fn is_bounded(&self) -> bool {
        !matches!(self, ResponseFunction::PowerLaw { eps, .. } if *eps == 0.0)
    }
}

fn number_list(e: &Expr) -> Result<Vec<f64>> {
    e.as_list()?.iter().map(Expr::as_f64).collect()
}

impl ResponseFunction {
    pub fn to_expr(&self) -> Expr {
        let list = |v: &[f64]| Expr::List(v.iter().map(|x| Expr::Number(*x)).collect());
        match self {
            ResponseFunction::IndicatorBall { radius } => call("indicator_ball", vec![(Some("radius"), Expr::Number(*radius))]),
            ResponseFunction::Exponential { beta } => call("exponential", vec![(Some("beta"), Expr::Number(*beta))]),
            ResponseFunction::PowerLaw { beta, eps } => call(
                "power_law",
                vec![(Some("beta"), Expr::Number(*beta)), (Some("eps"), Expr::Number(*eps))],
            ),
            ResponseFunction::Tabulated { radii, values } => {
                call("tabulated", vec![(Some("radii"), list(radii)), (Some("values"), list(values))])
            }
        }
    }

    /// `indicator_ball(radius)`, `exponential(beta)`, `power_law(beta, eps)`
    /// or `tabulated(radii=[..], values=[..])`.
    pub fn from_expr(e: &Expr) -> Result<Self> {
        let (name, args) = e.as_call()?;
        let mut a = Args::new(name, args);
        let h = match name {
            "indicator_ball" => ResponseFunction::IndicatorBall {
                radius: a.require("radius", 0)?.as_f64()?,
            },
            "exponential" => ResponseFunction::Exponential {
                beta: a.require("beta", 0)?.as_f64()?,
            },
            "power_law" => ResponseFunction::PowerLaw {
                beta: a.require("beta", 0)?.as_f64()?,
                eps: a.require("eps", 1)?.as_f64()?,
            },
            "tabulated" => ResponseFunction::Tabulated {
                radii: number_list(a.require("radii", 0)?)?,
                values: number_list(a.require("values", 1)?)?,
            },
            other => return Err(Error::Parse(format!("unknown response function `{other}`"))),
        };
        a.finish()?;
        h.validate(1)?;
        Ok(h)
    }
}

impl fmt::Display for ResponseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

impl FromStr for ResponseFunction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ResponseFunction::from_expr(&Expr::parse(s)?)
    }
}

/// Field values at evaluation points.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSample {
    pub eval_points: Vec<Point>,
    pub values: Vec<f64>,
}

fn field(pattern: &PointPattern, h: &ResponseFunction, eval: &[Point], combine: impl Fn(f64, f64) -> f64) -> FieldSample {
    let w = pattern.window();
    let values = match h.support_radius() {
        Some(r) => {
            let index = NeighborIndex::new(pattern, r);
            eval.iter()
                .map(|y| {
                    let mut acc = 0.0;
                    index.for_each_within(y.coords(), |_, d2| acc = combine(acc, h.eval(d2.sqrt())));
                    acc
                })
                .collect()
        }
        None => eval
            .iter()
            .map(|y| pattern.points().fold(0.0, |acc, x| combine(acc, h.eval(w.dist(x, y.coords())))))
            .collect(),
    };
    FieldSample {
        eval_points: eval.to_vec(),
        values,
    }
}

/// `sum_X h(X, y)` under the window metric.
pub fn additive_field(pattern: &PointPattern, h: &ResponseFunction, eval: &[Point]) -> FieldSample {
    field(pattern, h, eval, |a, v| a + v)
}

/// `max_X h(X, y)`, zero for an empty pattern.
pub fn extremal_field(pattern: &PointPattern, h: &ResponseFunction, eval: &[Point]) -> FieldSample {
    field(pattern, h, eval, f64::max)
}

fn check_coverage_radius(w: &Window, r: f64) -> Result<()> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::param("r", format!("{r} must be non-negative")));
    }
    if w.is_periodic() && 2.0 * r >= w.min_side() {
        return Err(Error::param("r", format!("{r} is not below half the window side")));
    }
    Ok(())
}

/// Number of balls of radius `r` covering each grid-cell centre.
pub fn coverage_counts(pattern: &PointPattern, r: f64, grid: &CellGridSpec) -> Vec<u32> {
    let w = pattern.window();
    let d = w.dim();
    let n = grid.n_per_axis() as i64;
    let mut counts = vec![0u32; grid.len()];
    let mut idx = vec![0usize; d];
    let mut c = vec![0.0; d];
    for x in pattern.points() {
        // candidate cell ranges per axis, wrapped on the torus
        let ranges: Vec<(i64, i64)> = (0..d)
            .map(|a| {
                let h = grid.cell_side(a);
                let lo = ((x[a] - r - w.lower()[a]) / h - 0.5).floor() as i64;
                let hi = ((x[a] + r - w.lower()[a]) / h - 0.5).ceil() as i64;
                if w.is_periodic() {
                    (lo, hi.min(lo + n - 1))
                } else {
                    (lo.max(0), hi.min(n - 1))
                }
            })
            .collect();
        if ranges.iter().any(|(lo, hi)| lo > hi) {
            continue;
        }
        let mut odo: Vec<i64> = ranges.iter().map(|r| r.0).collect();
        'cells: loop {
            for a in 0..d {
                let i = odo[a].rem_euclid(n) as usize;
                idx[a] = i;
                c[a] = w.lower()[a] + (i as f64 + 0.5) * grid.cell_side(a);
            }
            if w.dist2(x, &c) <= r * r {
                counts[grid.flat_index(&idx)] += 1;
            }
            let mut a = 0;
            loop {
                odo[a] += 1;
                if odo[a] <= ranges[a].1 {
                    break;
                }
                odo[a] = ranges[a].0;
                a += 1;
                if a == d {
                    break 'cells;
                }
            }
        }
    }
    counts
}

/// Coverage field `sum_X 1(|x - X| <= r)` on the `grid_n^d` cell centres.
pub fn coverage_field(pattern: &PointPattern, r: f64, grid_n: usize) -> Result<FieldSample> {
    let w = pattern.window();
    check_coverage_radius(w, r)?;
    let grid = CellGridSpec::new(w, grid_n, DEFAULT_MAX_GRID_CELLS)?;
    let values = coverage_counts(pattern, r, &grid).into_iter().map(f64::from).collect();
    let eval_points = (0..grid.len()).map(|i| Point::from(&grid.center(i)[..])).collect();
    Ok(FieldSample { eval_points, values })
}

/// Mean volume of the region covered by at least `k` balls, by grid counting.
pub fn k_covered_volume(
    spec: &GeneratorSpec,
    w: &Window,
    r: f64,
    k: u32,
    grid_n: usize,
    reps: usize,
    stream: &RandomStream,
) -> Result<EstimateWithError> {
    Ok(k_covered_volumes(spec, w, &[r], &[k], grid_n, reps, stream)?[0].2)
}

/// `(r, k, volume)` for every radius and every `k`, reusing each pattern.
pub fn k_covered_volumes(
    spec: &GeneratorSpec,
    w: &Window,
    radii: &[f64],
    ks: &[u32],
    grid_n: usize,
    reps: usize,
    stream: &RandomStream,
) -> Result<Vec<(f64, u32, EstimateWithError)>> {
    check_reps(reps)?;
    if ks.iter().any(|k| *k < 1) {
        return Err(Error::param("k", "coverage order must be at least 1"));
    }
    for r in radii {
        check_coverage_radius(w, *r)?;
    }
    let grid = CellGridSpec::new(w, grid_n, DEFAULT_MAX_GRID_CELLS)?;
    let sampler = spec.sampler(w)?;
    let vol = grid.cell_volume();
    let per_rep: Vec<Vec<f64>> = replicate(reps, stream, |_, st| {
        let p = sampler.sample(&st);
        let mut row = Vec::with_capacity(radii.len() * ks.len());
        for r in radii {
            let counts = coverage_counts(&p, *r, &grid);
            for k in ks {
                row.push(vol * counts.iter().filter(|c| **c >= *k).count() as f64);
            }
        }
        row
    });
    let mut out = Vec::new();
    for (i, r) in radii.iter().enumerate() {
        for (j, k) in ks.iter().enumerate() {
            let col: Vec<f64> = per_rep.iter().map(|row| row[i * ks.len() + j]).collect();
            out.push((*r, *k, EstimateWithError::from_samples(&col)));
        }
    }
    Ok(out)
}

/// `P(N >= k)` for the count `N` in a ball of radius `r`, when it has a
/// closed form (Poisson and mixed Poisson families).
pub fn ball_count_tail(spec: &GeneratorSpec, d: usize, r: f64, k: u32) -> Option<f64> {
    let ball = unit_ball_volume_unchecked(d) * r.powi(d as i32);
    let tail = |lambda: f64| -> f64 {
        if k == 0 {
            return 1.0;
        }
        let mu = lambda * ball;
        if mu == 0.0 {
            return 0.0;
        }
        statrs::function::gamma::gamma_lr(k as f64, mu)
    };
    match spec {
        GeneratorSpec::HomogeneousPoisson { intensity } => Some(tail(*intensity)),
        GeneratorSpec::MixedPoisson { mixing: MixingLaw::Discrete(atoms) } => {
            Some(atoms.iter().map(|(w, l)| w * tail(*l)).sum())
        }
        GeneratorSpec::MixedPoisson {
            mixing: MixingLaw::Scaled { law, scale },
        } => {
            let top = law.support_max();
            Some((0..=top).map(|i| law.pmf(i) * tail(scale * i as f64)).sum())
        }
        _ => None,
    }
}

/// First `k` (in the given order) where the sign of `a - b` differs from
/// its sign at the first `k`; `None` when there is no crossing.
pub fn coverage_crossing(ks: &[u32], a: &[f64], b: &[f64]) -> Option<u32> {
    let first = ks.iter().zip(a.iter().zip(b)).find(|(_, (x, y))| x != y)?;
    let s0 = (first.1 .0 - first.1 .1).signum();
    ks.iter()
        .zip(a.iter().zip(b))
        .find(|(_, (x, y))| (*x - *y).signum() == -s0 && x != y)
        .map(|(k, _)| *k)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LevelDirection {
    /// Bound on `P(V(y) >= a)`.
    MinAbove,
    /// Bound on `P(V(y) <= a)`.
    MaxBelow,
}

const QUAD_TOLERANCE: f64 = 1e-8;

fn simpson(f: &impl Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return left + right + diff / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

fn integrate(f: &impl Fn(f64) -> f64, a: f64, b: f64, rel: f64) -> f64 {
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, rel * whole.abs() + 1e-300, 24)
}

/// `int_{R^d} g(h(|x|)) dx` for `g(0) = 0`, by radial quadrature over
/// dyadic shells with a geometric tail correction.
pub fn radial_integral(h: &ResponseFunction, d: usize, g: impl Fn(f64) -> f64) -> f64 {
    let surface = d as f64 * unit_ball_volume_unchecked(d);
    let f = |r: f64| g(h.eval(r)) * r.powi(d as i32 - 1);
    match h {
        ResponseFunction::IndicatorBall { radius } => g(1.0) * unit_ball_volume_unchecked(d) * radius.powi(d as i32),
        ResponseFunction::Tabulated { radii, .. } => {
            surface * radii.windows(2).map(|k| integrate(&f, k[0], k[1], QUAD_TOLERANCE)).sum::<f64>()
        }
        _ => {
            let unit = match h {
                ResponseFunction::Exponential { beta } => 1.0 / beta,
                ResponseFunction::PowerLaw { eps, .. } => eps.max(1e-3),
                _ => 1.0,
            };
            let mut total = integrate(&f, 0.0, unit, QUAD_TOLERANCE);
            let mut lo = unit;
            let (mut prev, mut prev_ratio) = (f64::NAN, f64::NAN);
            for _ in 0..2000 {
                let piece = integrate(&f, lo, 2.0 * lo, QUAD_TOLERANCE);
                total += piece;
                lo *= 2.0;
                if piece.abs() <= 1e-3 * QUAD_TOLERANCE * total.abs() {
                    break;
                }
                let ratio = piece / prev;
                // power-law shells shrink geometrically once h is small: sum the tail
                if ratio > 0.0 && ratio < 1.0 && (ratio - prev_ratio).abs() < 1e-4 * ratio && h.eval(lo) < 1e-6 {
                    total += piece * ratio / (1.0 - ratio);
                    break;
                }
                (prev, prev_ratio) = (piece, ratio);
            }
            surface * total
        }
    }
}

/// Chernoff bound on level sets of the additive shot-noise of a weakly
/// sub-Poisson process of intensity `lambda`:
/// `P(V >= a) <= inf_s exp(-s a + lambda int (e^{s h} - 1))` and
/// `P(V <= a) <= inf_s exp(s a + lambda int (e^{-s h} - 1))`.
///
/// `s` runs over a log grid `2^-10 .. 2^6` refined by golden-section search.
/// Returns `min(1, bound)`, or infinity when `e^{s h}` is not integrable.
pub fn level_exceedance_bound(lambda: f64, h: &ResponseFunction, a: f64, direction: LevelDirection, d: usize) -> Result<f64> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::param("a", format!("{a} must be positive")));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(Error::param("lambda", format!("{lambda} must be non-negative")));
    }
    h.validate(d)?;
    let sign = match direction {
        LevelDirection::MinAbove => 1.0,
        LevelDirection::MaxBelow => -1.0,
    };
    if lambda == 0.0 {
        return Ok(match direction {
            LevelDirection::MinAbove => 0.0,
            LevelDirection::MaxBelow => 1.0,
        });
    }
    if direction == LevelDirection::MinAbove && !h.is_bounded() {
        return Ok(f64::INFINITY);
    }
    let log_bound = |ln_s: f64| {
        let s = ln_s.exp();
        -sign * s * a + lambda * radial_integral(h, d, |v| (sign * s * v).exp_m1())
    };
    let steps = 160;
    let (lo, hi) = (-10.0 * std::f64::consts::LN_2, 6.0 * std::f64::consts::LN_2);
    let grid: Vec<(f64, f64)> = (0..=steps)
        .map(|i| {
            let t = lo + (hi - lo) * i as f64 / steps as f64;
            (t, log_bound(t))
        })
        .collect();
    let best = (0..grid.len()).min_by(|i, j| grid[*i].1.total_cmp(&grid[*j].1)).unwrap();
    let mut value = grid[best].1;
    if best > 0 && best < steps {
        let (mut x0, mut x3) = (grid[best - 1].0, grid[best + 1].0);
        let phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = x3 - phi * (x3 - x0);
        let mut x2 = x0 + phi * (x3 - x0);
        let (mut f1, mut f2) = (log_bound(x1), log_bound(x2));
        for _ in 0..100 {
            if (x3 - x0).abs() < 1e-10 {
                break;
            }
            if f1 < f2 {
                x3 = x2;
                x2 = x1;
                f2 = f1;
                x1 = x3 - phi * (x3 - x0);
                f1 = log_bound(x1);
            } else {
                x0 = x1;
                x1 = x2;
                f1 = f2;
                x2 = x0 + phi * (x3 - x0);
                f2 = log_bound(x2);
            }
        }
        value = value.min(f1).min(f2);
    }
    Ok(value.exp().min(1.0))
}

/// Exact law of the count in a ball for a mixed Poisson process, as a
/// count distribution (Poisson when there is no mixing).
pub fn poisson_ball_count(lambda: f64, d: usize, r: f64) -> Result<CountDistribution> {
    CountDistribution::poisson(lambda * unit_ball_volume_unchecked(d) * r.powi(d as i32))
}
