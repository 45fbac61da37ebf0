//! Empirical clustering statistics.
//!
//! Every estimator has a pattern-level form (one realisation) and a
//! spec-level form that samples `reps` independent realisations, averages
//! within each replication first and reports the across-replication mean
//! and standard error. Replication `i` always samples its pattern from
//! `stream.derive(i)`, so two statistics computed with the same stream see
//! the same patterns; random placements use a separate child stream.

use rand::Rng;

use crate::error::{Error, Result};
use crate::expr::{call, Args, Expr};
use crate::geometry::{unit_ball_volume_unchecked, PointPattern, Window};
use crate::procgen::{GeneratorSpec, Sampler};
use crate::spatial::NeighborIndex;
use crate::stats::{check_increasing, check_reps, replicate, CurveEstimate, EstimateWithError};
use crate::stream::{RandomStream, StreamRng};

/// Largest moment order accepted by [`factorial_moment`].
pub const MAX_MOMENT_ORDER: u32 = 4;

/// Shape of a test region; its size is the scale parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegionShape {
    /// Ball of radius `scale`.
    Ball,
    /// Cube of side `scale`.
    Box,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    Ball(f64),
    Box(f64),
}

impl Region {
    pub fn new(shape: RegionShape, scale: f64) -> Self {
        match shape {
            RegionShape::Ball => Region::Ball(scale),
            RegionShape::Box => Region::Box(scale),
        }
    }

    pub fn shape(&self) -> RegionShape {
        match self {
            Region::Ball(_) => RegionShape::Ball,
            Region::Box(_) => RegionShape::Box,
        }
    }

    pub fn scale(&self) -> f64 {
        match self {
            Region::Ball(r) | Region::Box(r) => *r,
        }
    }

    pub fn volume(&self, d: usize) -> f64 {
        match self {
            Region::Ball(r) => unit_ball_volume_unchecked(d) * r.powi(d as i32),
            Region::Box(s) => s.powi(d as i32),
        }
    }

    /// Diameter along an axis.
    fn extent(&self) -> f64 {
        match self {
            Region::Ball(r) => 2.0 * r,
            Region::Box(s) => *s,
        }
    }

    fn check_fits(&self, w: &Window) -> Result<()> {
        let s = self.scale();
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::param("scale", format!("{s} must be positive")));
        }
        if self.extent() > w.min_side() {
            return Err(Error::param("scale", format!("region of size {s} does not fit in {w}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplaceSign {
    /// `E exp(-sum f)`
    Minus,
    /// `E exp(+sum f)`
    Plus,
}

/// Non-negative test functions for the Laplace functional.
#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    Constant(f64),
    /// `height` on the box `[lower, upper)`, zero elsewhere.
    BoxIndicator { lower: Vec<f64>, upper: Vec<f64>, height: f64 },
    /// `height` on the closed ball, zero elsewhere.
    BallIndicator { center: Vec<f64>, radius: f64, height: f64 },
}

impl TestFunction {
    pub fn to_expr(&self) -> Expr {
        let list = |v: &[f64]| Expr::List(v.iter().map(|x| Expr::Number(*x)).collect());
        match self {
            TestFunction::Constant(c) => call("constant", vec![(None, Expr::Number(*c))]),
            TestFunction::BoxIndicator { lower, upper, height } => call(
                "box",
                vec![(Some("lower"), list(lower)), (Some("upper"), list(upper)), (Some("height"), Expr::Number(*height))],
            ),
            TestFunction::BallIndicator { center, radius, height } => call(
                "ball",
                vec![(Some("center"), list(center)), (Some("radius"), Expr::Number(*radius)), (Some("height"), Expr::Number(*height))],
            ),
        }
    }

    /// `constant(c)`, `box(lower=[..], upper=[..], height=h)` or
    /// `ball(center=[..], radius=r, height=h)`.
    pub fn from_expr(e: &Expr) -> Result<Self> {
        let (name, args) = e.as_call()?;
        let mut a = Args::new(name, args);
        let nums = |e: &Expr| -> Result<Vec<f64>> { e.as_list()?.iter().map(Expr::as_f64).collect() };
        let f = match name {
            "constant" => TestFunction::Constant(a.require("value", 0)?.as_f64()?),
            "box" => TestFunction::BoxIndicator {
                lower: nums(a.require("lower", 0)?)?,
                upper: nums(a.require("upper", 1)?)?,
                height: a.require("height", 2)?.as_f64()?,
            },
            "ball" => TestFunction::BallIndicator {
                center: nums(a.require("center", 0)?)?,
                radius: a.require("radius", 1)?.as_f64()?,
                height: a.require("height", 2)?.as_f64()?,
            },
            other => return Err(Error::Parse(format!("unknown test function `{other}`"))),
        };
        a.finish()?;
        f.validate()?;
        Ok(f)
    }
}

impl TestFunction {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Constant(c) => *c,
            TestFunction::BoxIndicator { lower, upper, height } => {
                if x.iter().zip(lower.iter().zip(upper)).all(|(v, (l, u))| v >= l && v < u) {
                    *height
                } else {
                    0.0
                }
            }
            TestFunction::BallIndicator { center, radius, height } => {
                let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum();
                if d2 <= radius * radius {
                    *height
                } else {
                    0.0
                }
            }
        }
    }

    /// `int_W g(f(x)) dx` for `g(0) = 0`, exact for these piecewise-constant
    /// functions when their support lies in the window.
    pub fn integral_of(&self, w: &Window, g: impl Fn(f64) -> f64) -> f64 {
        match self {
            TestFunction::Constant(c) => g(*c) * w.volume(),
            TestFunction::BoxIndicator { lower, upper, height } => {
                g(*height) * lower.iter().zip(upper).map(|(l, u)| u - l).product::<f64>()
            }
            TestFunction::BallIndicator { radius, height, .. } => {
                g(*height) * unit_ball_volume_unchecked(w.dim()) * radius.powi(w.dim() as i32)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let h = match self {
            TestFunction::Constant(c) => *c,
            TestFunction::BoxIndicator { height, .. } | TestFunction::BallIndicator { height, .. } => *height,
        };
        if !(h.is_finite() && h >= 0.0) {
            return Err(Error::param("f", format!("value {h} must be finite and non-negative")));
        }
        Ok(())
    }
}

/// Poisson closed form `exp(-lambda int (1 - e^{-f}))` or `exp(lambda int (e^f - 1))`.
pub fn poisson_laplace(intensity: f64, f: &TestFunction, w: &Window, sign: LaplaceSign) -> f64 {
    match sign {
        LaplaceSign::Minus => (-intensity * f.integral_of(w, |v| 1.0 - (-v).exp())).exp(),
        LaplaceSign::Plus => (intensity * f.integral_of(w, f64::exp_m1)).exp(),
    }
}

// pattern-level statistics

/// Ordered pairs `(i, j)`, `i != j`, at distance at most `r` for every `r`
/// in the (increasing) grid.
pub fn pair_counts(p: &PointPattern, r_grid: &[f64]) -> Vec<f64> {
    let mut counts = vec![0.0; r_grid.len()];
    let Some(&r_max) = r_grid.last() else {
        return counts;
    };
    let mut hist = vec![0u64; r_grid.len()];
    for (_, _, d2) in NeighborIndex::new(p, r_max).pairs() {
        let d = d2.sqrt();
        let k = r_grid.partition_point(|r| *r < d);
        if k < hist.len() {
            hist[k] += 2;
        }
    }
    let mut acc = 0;
    for (c, h) in counts.iter_mut().zip(hist) {
        acc += h;
        *c = acc as f64;
    }
    counts
}

fn epanechnikov(t: f64, b: f64) -> f64 {
    let u = t / b;
    if u.abs() < 1.0 {
        0.75 * (1.0 - u * u) / b
    } else {
        0.0
    }
}

/// `sum over ordered pairs of k_b(r - |X_i - X_j|)` for each `r`.
pub fn pair_kernel_sums(p: &PointPattern, r_grid: &[f64], bandwidth: f64) -> Vec<f64> {
    let mut sums = vec![0.0; r_grid.len()];
    let Some(&r_max) = r_grid.last() else {
        return sums;
    };
    for (_, _, d2) in NeighborIndex::new(p, r_max + bandwidth).pairs() {
        let d = d2.sqrt();
        let lo = r_grid.partition_point(|r| *r <= d - bandwidth);
        for (k, r) in r_grid.iter().enumerate().skip(lo) {
            if *r >= d + bandwidth {
                break;
            }
            sums[k] += 2.0 * epanechnikov(r - d, bandwidth);
        }
    }
    sums
}

fn placement<R: Rng + ?Sized>(w: &Window, region: &Region, rng: &mut R) -> Vec<f64> {
    match region {
        Region::Ball(r) => w.random_center(rng, *r),
        Region::Box(s) => {
            // lower corner of a box kept inside the window
            let c = w.random_center(rng, s / 2.0);
            if w.is_periodic() {
                c
            } else {
                c.iter().map(|x| x - s / 2.0).collect()
            }
        }
    }
}

/// Counts of points in `placements` uniformly placed copies of `region`.
pub fn region_counts<R: Rng + ?Sized>(p: &PointPattern, region: &Region, placements: usize, rng: &mut R) -> Vec<u64> {
    let w = p.window();
    match region {
        Region::Ball(r) => {
            let index = NeighborIndex::new(p, *r);
            (0..placements).map(|_| index.count_within(&placement(w, region, rng)) as u64).collect()
        }
        Region::Box(s) => (0..placements)
            .map(|_| p.count_in_box(&placement(w, region, rng), *s) as u64)
            .collect(),
    }
}

pub fn falling_factorial(n: u64, k: u32) -> f64 {
    (0..k as u64).map(|j| n.saturating_sub(j) as f64).product()
}

// spec-level estimators

fn placement_rng(rep_stream: &RandomStream) -> StreamRng {
    rep_stream.derive_named("placements").rng()
}

fn require_periodic(w: &Window) -> Result<()> {
    if !w.is_periodic() {
        return Err(Error::InvalidWindow("estimator needs a periodic window".into()));
    }
    Ok(())
}

struct Pairwise {
    per_rep: Vec<(usize, Vec<f64>)>,
    intensity: f64,
}

/// Samples replications, drops empty ones and pools the intensity.
fn pairwise_reps(
    sampler: &Sampler,
    reps: usize,
    stream: &RandomStream,
    stat: impl Fn(&PointPattern) -> Vec<f64> + Sync + Send,
) -> Result<Pairwise> {
    let per_rep: Vec<(usize, Vec<f64>)> = replicate(reps, stream, |_, st| {
        let p = sampler.sample(&st);
        let v = if p.is_empty() { Vec::new() } else { stat(&p) };
        (p.len(), v)
    });
    let kept: Vec<(usize, Vec<f64>)> = per_rep.into_iter().filter(|(n, _)| *n > 0).collect();
    let empty = reps - kept.len();
    if 2 * empty > reps {
        return Err(Error::TooManyEmpty { empty, total: reps });
    }
    let total: usize = kept.iter().map(|(n, _)| n).sum();
    let intensity = total as f64 / (kept.len() as f64 * sampler.window().volume());
    Ok(Pairwise { per_rep: kept, intensity })
}

fn curve_from(abscissa: &[f64], rows: &[Vec<f64>]) -> Result<CurveEstimate> {
    let estimates = (0..abscissa.len())
        .map(|k| EstimateWithError::from_samples(&rows.iter().map(|r| r[k]).collect::<Vec<_>>()))
        .collect();
    CurveEstimate::new(abscissa.to_vec(), estimates)
}

fn check_radii(w: &Window, r_grid: &[f64], reach: f64) -> Result<()> {
    check_increasing("r_grid", r_grid)?;
    match r_grid.first() {
        None => return Err(Error::param("r_grid", "must not be empty")),
        Some(r) if *r <= 0.0 => return Err(Error::param("r_grid", "radii must be positive")),
        _ => {}
    }
    let r_max = r_grid[r_grid.len() - 1] + reach;
    if 2.0 * r_max >= w.min_side() {
        return Err(Error::param("r_grid", format!("largest radius {r_max} is not below half the window side")));
    }
    Ok(())
}

/// Ripley's K: `C(r) / (lambda^2 |W|)` with `C(r)` the ordered pair count and
/// `lambda` pooled over replications, so that `K(r) = kappa_d r^d` for Poisson.
pub fn ripley_k(spec: &GeneratorSpec, w: &Window, r_grid: &[f64], reps: usize, stream: &RandomStream) -> Result<CurveEstimate> {
    require_periodic(w)?;
    check_radii(w, r_grid, 0.0)?;
    check_reps(reps)?;
    let sampler = spec.sampler(w)?;
    let pw = pairwise_reps(&sampler, reps, stream, |p| pair_counts(p, r_grid))?;
    let norm = pw.intensity * pw.intensity * w.volume();
    let rows: Vec<Vec<f64>> = pw.per_rep.iter().map(|(_, c)| c.iter().map(|v| v / norm).collect()).collect();
    curve_from(r_grid, &rows)
}

/// Default pair-correlation bandwidth for a radius grid.
pub fn default_bandwidth(r_grid: &[f64]) -> f64 {
    0.15 * r_grid.last().copied().unwrap_or(0.0)
}

/// Kernel-smoothed pair correlation with an Epanechnikov kernel.
pub fn pair_correlation(
    spec: &GeneratorSpec,
    w: &Window,
    r_grid: &[f64],
    bandwidth: f64,
    reps: usize,
    stream: &RandomStream,
) -> Result<CurveEstimate> {
    require_periodic(w)?;
    if !(bandwidth.is_finite() && bandwidth > 0.0) {
        return Err(Error::param("bandwidth", format!("{bandwidth} must be positive")));
    }
    check_radii(w, r_grid, bandwidth)?;
    check_reps(reps)?;
    let d = w.dim();
    let sampler = spec.sampler(w)?;
    let pw = pairwise_reps(&sampler, reps, stream, |p| pair_kernel_sums(p, r_grid, bandwidth))?;
    let base = pw.intensity * pw.intensity * w.volume() * d as f64 * unit_ball_volume_unchecked(d);
    let rows: Vec<Vec<f64>> = pw
        .per_rep
        .iter()
        .map(|(_, s)| s.iter().zip(r_grid).map(|(v, r)| v / (base * r.powi(d as i32 - 1))).collect())
        .collect();
    curve_from(r_grid, &rows)
}

fn check_placements(placements: usize) -> Result<()> {
    if placements == 0 {
        return Err(Error::param("placements", "need at least one placement"));
    }
    Ok(())
}

/// Per replication, per scale: mean over placements of `g(count)`. The
/// same placement centres are reused across scales.
fn placement_means(
    spec: &GeneratorSpec,
    w: &Window,
    shape: RegionShape,
    scales: &[f64],
    placements: usize,
    reps: usize,
    stream: &RandomStream,
    g: impl Fn(u64) -> f64 + Sync + Send,
) -> Result<Vec<Vec<f64>>> {
    check_reps(reps)?;
    check_placements(placements)?;
    for s in scales {
        Region::new(shape, *s).check_fits(w)?;
    }
    let sampler = spec.sampler(w)?;
    Ok(replicate(reps, stream, |_, st| {
        let p = sampler.sample(&st);
        scales
            .iter()
            .enumerate()
            .map(|(k, s)| {
                // independent but reproducible placements per scale
                let mut rng = st.derive_named("placements").derive(k as u64).rng();
                let counts = region_counts(&p, &Region::new(shape, *s), placements, &mut rng);
                counts.iter().map(|c| g(*c)).sum::<f64>() / placements as f64
            })
            .collect()
    }))
}

/// Void probabilities over a range of region sizes.
pub fn void_curve(
    spec: &GeneratorSpec,
    w: &Window,
    shape: RegionShape,
    scales: &[f64],
    placements: usize,
    reps: usize,
    stream: &RandomStream,
) -> Result<CurveEstimate> {
    check_increasing("scales", scales)?;
    let rows = placement_means(spec, w, shape, scales, placements, reps, stream, |c| (c == 0) as u8 as f64)?;
    curve_from(scales, &rows)
}

pub fn void_probability(
    spec: &GeneratorSpec,
    w: &Window,
    region: Region,
    placements: usize,
    reps: usize,
    stream: &RandomStream,
) -> Result<EstimateWithError> {
    Ok(void_curve(spec, w, region.shape(), &[region.scale()], placements, reps, stream)?.estimates[0])
}

fn check_order(k: u32) -> Result<()> {
    if !(1..=MAX_MOMENT_ORDER).contains(&k) {
        return Err(Error::param("k", format!("moment order {k} outside 1..={MAX_MOMENT_ORDER}")));
    }
    Ok(())
}

/// `E[N(N-1)...(N-k+1)]` for the count `N` in boxes of each side.
pub fn factorial_moment_curve(
    spec: &GeneratorSpec,
    w: &Window,
    box_sides: &[f64],
    k: u32,
    placements: usize,
    reps: usize,
    stream: &RandomStream,
) -> Result<CurveEstimate> {
    check_order(k)?;
    check_increasing("box_sides", box_sides)?;
    let rows = placement_means(spec, w, RegionShape::Box, box_sides, placements, reps, stream, |c| {
        falling_factorial(c, k)
    })?;
    curve_from(box_sides, &rows)
}

pub fn factorial_moment(
    spec: &GeneratorSpec,
    w: &Window,
    box_side: f64,
    k: u32,
    placements: usize,
    reps: usize,
    stream: &RandomStream,
) -> Result<EstimateWithError> {
    Ok(factorial_moment_curve(spec, w, &[box_side], k, placements, reps, stream)?.estimates[0])
}

/// `E exp(-+ sum_X f(X))`, averaged in log space so that large exponents
/// are reported instead of silently overflowing.
pub fn laplace_functional(
    spec: &GeneratorSpec,
    w: &Window,
    f: &TestFunction,
    sign: LaplaceSign,
    reps: usize,
    stream: &RandomStream,
) -> Result<EstimateWithError> {
    check_reps(reps)?;
    f.validate()?;
    let sampler = spec.sampler(w)?;
    let s = match sign {
        LaplaceSign::Minus => -1.0,
        LaplaceSign::Plus => 1.0,
    };
    let expo: Vec<f64> = replicate(reps, stream, |_, st| s * sampler.sample(&st).points().map(|x| f.eval(x)).sum::<f64>());
    let m = expo.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scaled: Vec<f64> = expo.iter().map(|e| (e - m).exp()).collect();
    let e = EstimateWithError::from_samples(&scaled);
    let factor = m.exp();
    let (value, std_error) = (e.value * factor, e.std_error * factor);
    if !value.is_finite() || !std_error.is_finite() {
        return Err(Error::Overflow(format!("Laplace functional exp({m}) exceeds the floating-point range")));
    }
    Ok(EstimateWithError {
        value,
        std_error,
        replications: reps,
    })
}

/// Variance of the count in a box of side `box_side`.
///
/// With `s_i`, `q_i` the per-replication means of `N` and `N^2`, the
/// estimate `mean(q) - mean(s)^2 + var(s)/R` is unbiased; its error is the
/// delta-method spread of `q_i - 2 mean(s) s_i`.
pub fn count_variance(
    spec: &GeneratorSpec,
    w: &Window,
    box_side: f64,
    placements: usize,
    reps: usize,
    stream: &RandomStream,
) -> Result<EstimateWithError> {
    check_reps(reps)?;
    check_placements(placements)?;
    let region = Region::Box(box_side);
    region.check_fits(w)?;
    let sampler = spec.sampler(w)?;
    let moments: Vec<(f64, f64)> = replicate(reps, stream, |_, st| {
        let p = sampler.sample(&st);
        let counts = region_counts(&p, &region, placements, &mut placement_rng(&st));
        let n = placements as f64;
        (
            counts.iter().map(|c| *c as f64).sum::<f64>() / n,
            counts.iter().map(|c| (*c as f64).powi(2)).sum::<f64>() / n,
        )
    });
    let s: Vec<f64> = moments.iter().map(|m| m.0).collect();
    let q: Vec<f64> = moments.iter().map(|m| m.1).collect();
    let es = EstimateWithError::from_samples(&s);
    let eq = EstimateWithError::from_samples(&q);
    let var_s = es.std_error.powi(2);
    let value = eq.value - es.value * es.value + var_s;
    let z: Vec<f64> = q.iter().zip(&s).map(|(qi, si)| qi - 2.0 * es.value * si).collect();
    Ok(EstimateWithError {
        value,
        std_error: EstimateWithError::from_samples(&z).std_error,
        replications: reps,
    })
}
