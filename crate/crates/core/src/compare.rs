//! Verdicts on weak sub- and super-Poissonianity and pairwise comparisons.
//!
//! The orders themselves are exact notions; the finite-sample verdicts
//! below are heuristics with fixed thresholds. A scale is consistent with
//! "less clustering" when its z-score is at most [`CONSISTENT_Z`], and a
//! scale pointing against the dominant direction by more than
//! [`VIOLATION_Z`] standard errors is reported as a violation.
//!
//! Moment comparisons use one box `B` raised to the `k`-th power rather than
//! `k` disjoint boxes.

use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::{Metric, Window};
use crate::procgen::GeneratorSpec;
use crate::stats::{check_reps, replicate, z_score, CurveEstimate, EstimateWithError};
use crate::stream::RandomStream;
use crate::summaries::{
    count_variance, factorial_moment_curve, ripley_k, void_curve, RegionShape, MAX_MOMENT_ORDER,
};

pub const CONSISTENT_Z: f64 = 2.0;
pub const VIOLATION_Z: f64 = 4.0;
/// Placements per replication used by the weak-order tests.
pub const DEFAULT_PLACEMENTS: usize = 32;
/// Relative intensity mismatch tolerated by [`compare_two`].
pub const INTENSITY_TOLERANCE: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    /// Void probability of a ball whose radius is the scale.
    Voids,
    /// `k`-th factorial moment of the count in a box whose side is the scale.
    FactorialMoment(u32),
    /// Ripley's K at radius equal to the scale.
    RipleyK,
    /// Variance of the count in a box whose side is the scale.
    Variance,
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statistic::Voids => f.write_str("voids"),
            Statistic::FactorialMoment(k) => write!(f, "factorial_moment_{k}"),
            Statistic::RipleyK => f.write_str("ripley_k"),
            Statistic::Variance => f.write_str("variance"),
        }
    }
}

impl std::str::FromStr for Statistic {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "voids" => Ok(Statistic::Voids),
            "ripley_k" => Ok(Statistic::RipleyK),
            "variance" => Ok(Statistic::Variance),
            _ => s
                .strip_prefix("factorial_moment_")
                .and_then(|k| k.parse().ok())
                .map(Statistic::FactorialMoment)
                .ok_or_else(|| Error::Parse(format!("unknown statistic `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Verdict {
    ConsistentSub,
    ConsistentSuper,
    Inconclusive,
    /// First scale contradicting the dominant direction.
    Violated(f64),
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::ConsistentSub => f.write_str("consistent_sub"),
            Verdict::ConsistentSuper => f.write_str("consistent_super"),
            Verdict::Inconclusive => f.write_str("inconclusive"),
            Verdict::Violated(s) => write!(f, "violated({s})"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleComparison {
    pub scale: f64,
    pub estimate: f64,
    pub reference: f64,
    pub std_error: f64,
    pub z_score: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingReport {
    pub statistic: Statistic,
    pub per_scale: Vec<ScaleComparison>,
    pub verdict: Verdict,
}

/// Verdict from scale-wise z-scores, where negative means "clusters less".
pub fn verdict_from(scales: &[f64], z: &[f64]) -> Verdict {
    let sub_ok = z.iter().all(|v| *v <= CONSISTENT_Z);
    let super_ok = z.iter().all(|v| *v >= -CONSISTENT_Z);
    match (sub_ok, super_ok) {
        (true, true) => Verdict::Inconclusive,
        (true, false) => Verdict::ConsistentSub,
        (false, true) => Verdict::ConsistentSuper,
        (false, false) => {
            let dominant = z.iter().copied().fold(0.0f64, |a, v| if v.abs() > a.abs() { v } else { a });
            let against = |v: f64| if dominant > 0.0 { v < -VIOLATION_Z } else { v > VIOLATION_Z };
            match z.iter().position(|v| against(*v)) {
                Some(i) => Verdict::Violated(scales[i]),
                None => Verdict::Inconclusive,
            }
        }
    }
}

fn report(statistic: Statistic, scales: &[f64], rows: Vec<(f64, f64, f64)>) -> OrderingReport {
    let per_scale: Vec<ScaleComparison> = scales
        .iter()
        .zip(rows)
        .map(|(s, (estimate, reference, std_error))| ScaleComparison {
            scale: *s,
            estimate,
            reference,
            std_error,
            z_score: z_score(estimate - reference, std_error),
        })
        .collect();
    let z: Vec<f64> = per_scale.iter().map(|r| r.z_score).collect();
    OrderingReport {
        statistic,
        verdict: verdict_from(scales, &z),
        per_scale,
    }
}

/// Standard deviation of `N(N-1)...(N-k+1)` for `N ~ Poisson(mu)`:
/// `E[(N^(k))^2] = sum_j C(k,j)^2 j! mu^(2k-j)`.
pub fn poisson_falling_factorial_sd(mu: f64, k: u32) -> f64 {
    let mut second = 0.0;
    let mut binom = 1.0;
    let mut fact = 1.0;
    for j in 0..=k {
        if j > 0 {
            binom = binom * (k - j + 1) as f64 / j as f64;
            fact *= j as f64;
        }
        second += binom * binom * fact * mu.powi((2 * k - j) as i32);
    }
    (second - mu.powi(2 * k as i32)).max(0.0).sqrt()
}

/// Error floor at the Poisson reference, so that a statistic whose rare
/// events were never observed does not get a zero standard error.
fn floored(e: &EstimateWithError, floor: f64) -> f64 {
    e.std_error.max(floor)
}

fn check_scales(scales: &[f64]) -> Result<()> {
    crate::stats::check_increasing("scales", scales)?;
    if scales.is_empty() {
        return Err(Error::param("scales", "must not be empty"));
    }
    Ok(())
}

/// Compares void probabilities of balls (radius = scale) with
/// `exp(-lambda |B|)` and factorial moments of boxes (side = scale) with
/// `(lambda |B|)^k`, `k = 2..=k_max`.
pub fn weak_poisson_test(
    spec: &GeneratorSpec,
    w: &Window,
    scales: &[f64],
    k_max: u32,
    reps: usize,
    stream: &RandomStream,
) -> Result<Vec<OrderingReport>> {
    weak_poisson_test_with(spec, w, scales, k_max, DEFAULT_PLACEMENTS, reps, stream)
}

pub fn weak_poisson_test_with(
    spec: &GeneratorSpec,
    w: &Window,
    scales: &[f64],
    k_max: u32,
    placements: usize,
    reps: usize,
    stream: &RandomStream,
) -> Result<Vec<OrderingReport>> {
    if !(2..=MAX_MOMENT_ORDER).contains(&k_max) {
        return Err(Error::param("k_max", format!("{k_max} outside 2..={MAX_MOMENT_ORDER}")));
    }
    check_scales(scales)?;
    let lambda = spec.window_intensity(w);
    let d = w.dim();
    let n_obs = (reps * placements) as f64;
    let mut out = Vec::new();

    let voids = void_curve(spec, w, RegionShape::Ball, scales, placements, reps, stream)?;
    let rows = voids
        .estimates
        .iter()
        .zip(scales)
        .map(|(e, s)| {
            let reference = (-lambda * crate::summaries::Region::Ball(*s).volume(d)).exp();
            let floor = (reference * (1.0 - reference) / n_obs).sqrt();
            (e.value, reference, floored(e, floor))
        })
        .collect();
    out.push(report(Statistic::Voids, scales, rows));

    for k in 2..=k_max {
        let m = factorial_moment_curve(spec, w, scales, k, placements, reps, stream)?;
        let rows = m
            .estimates
            .iter()
            .zip(scales)
            .map(|(e, s)| {
                let mu = lambda * s.powi(d as i32);
                let floor = poisson_falling_factorial_sd(mu, k) / n_obs.sqrt();
                (e.value, mu.powi(k as i32), floored(e, floor))
            })
            .collect();
        out.push(report(Statistic::FactorialMoment(k), scales, rows));
    }
    Ok(out)
}

fn statistic_curve(
    spec: &GeneratorSpec,
    w: &Window,
    statistic: Statistic,
    scales: &[f64],
    placements: usize,
    reps: usize,
    stream: &RandomStream,
) -> Result<CurveEstimate> {
    match statistic {
        Statistic::Voids => void_curve(spec, w, RegionShape::Ball, scales, placements, reps, stream),
        Statistic::FactorialMoment(k) => factorial_moment_curve(spec, w, scales, k, placements, reps, stream),
        Statistic::RipleyK => ripley_k(spec, w, scales, reps, stream),
        Statistic::Variance => {
            let estimates = scales
                .iter()
                .enumerate()
                .map(|(i, s)| count_variance(spec, w, *s, placements, reps, &stream.derive_named("variance").derive(i as u64)))
                .collect::<Result<Vec<_>>>()?;
            CurveEstimate::new(scales.to_vec(), estimates)
        }
    }
}

/// Scale-wise comparison of `A` against `B`; `consistent_sub` means `A`
/// clusters less. Both processes are driven by the same streams.
pub fn compare_two(
    a: &GeneratorSpec,
    b: &GeneratorSpec,
    w: &Window,
    statistic: Statistic,
    scales: &[f64],
    reps: usize,
    stream: &RandomStream,
) -> Result<OrderingReport> {
    compare_two_with(a, b, w, statistic, scales, DEFAULT_PLACEMENTS, reps, stream)
}

#[allow(clippy::too_many_arguments)]
pub fn compare_two_with(
    a: &GeneratorSpec,
    b: &GeneratorSpec,
    w: &Window,
    statistic: Statistic,
    scales: &[f64],
    placements: usize,
    reps: usize,
    stream: &RandomStream,
) -> Result<OrderingReport> {
    check_scales(scales)?;
    let (la, lb) = (a.window_intensity(w), b.window_intensity(w));
    if !((la - lb).abs() <= INTENSITY_TOLERANCE * la.max(lb)) {
        return Err(Error::IntensityMismatch { a: la, b: lb });
    }
    let ca = statistic_curve(a, w, statistic, scales, placements, reps, stream)?;
    let cb = statistic_curve(b, w, statistic, scales, placements, reps, stream)?;
    let rows = ca
        .estimates
        .iter()
        .zip(&cb.estimates)
        .map(|(ea, eb)| (ea.value, eb.value, (ea.std_error.powi(2) + eb.std_error.powi(2)).sqrt()))
        .collect();
    Ok(report(statistic, scales, rows))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationRow {
    pub n: u64,
    /// Frequency of `|N - n| >= n^a` for the count in a set of volume `n`.
    pub empirical: EstimateWithError,
    pub bound: f64,
    /// `empirical <= bound + 3 SE`; `None` when the power guard skipped the row.
    pub holds: Option<bool>,
}

/// Deviation bound `2 exp(-n^(2a-1) / 9)`.
pub fn concentration_bound(n: u64, a: f64) -> f64 {
    2.0 * (-(n as f64).powf(2.0 * a - 1.0) / 9.0).exp()
}

/// Empirical deviation frequencies of the count in the cube of volume `n`
/// (Euclidean window), for a unit-intensity process.
pub fn concentration_check(
    spec: &GeneratorSpec,
    dim: usize,
    a: f64,
    n_list: &[u64],
    reps: usize,
    stream: &RandomStream,
) -> Result<Vec<ConcentrationRow>> {
    check_reps(reps)?;
    if !(a > 0.5 && a < 1.0) {
        return Err(Error::param("a", format!("{a} outside (0.5, 1)")));
    }
    let lambda = spec.intensity_in(dim);
    if !lambda.exact || (lambda.value - 1.0).abs() > 1e-9 {
        return Err(Error::IntensityMismatch { a: lambda.value, b: 1.0 });
    }
    n_list
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            if n < 16 {
                return Err(Error::param("n", format!("{n} is below 16")));
            }
            let bound = concentration_bound(n, a);
            let side = (n as f64).powf(1.0 / dim as f64);
            let w = Window::cube(dim, side, Metric::Euclidean)?;
            let sampler = spec.sampler(&w)?;
            let dev = (n as f64).powf(a);
            let hits = replicate(reps, &stream.derive(i as u64), |_, st| {
                let c = sampler.sample(&st).len() as f64;
                ((c - n as f64).abs() >= dev) as u8 as f64
            });
            let p = hits.iter().sum::<f64>() / reps as f64;
            let se = (p * (1.0 - p) / reps as f64).sqrt();
            let empirical = EstimateWithError {
                value: p,
                std_error: se,
                replications: reps,
            };
            let holds = ((reps as f64) >= 10.0 / bound).then_some(p <= bound + 3.0 * se);
            Ok(ConcentrationRow { n, empirical, bound, holds })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn torus(side: f64) -> Window {
        Window::cube(2, side, Metric::Periodic).unwrap()
    }

    fn spec(s: &str) -> GeneratorSpec {
        s.parse().unwrap()
    }

    const SIMPLE: &str = "perturbed_lattice(spacing=1, replication=binomial(1, 1), displacement=uniform_in_cell)";
    const GEOMETRIC: &str = "perturbed_lattice(spacing=1, replication=geometric(0.5), displacement=uniform_in_cell)";

    #[test]
    fn verdict_rules() {
        let s = [1.0, 2.0, 3.0];
        assert_eq!(verdict_from(&s, &[0.5, -1.0, 1.9]), Verdict::Inconclusive);
        assert_eq!(verdict_from(&s, &[-5.0, -1.0, 1.9]), Verdict::ConsistentSub);
        assert_eq!(verdict_from(&s, &[5.0, -1.0, 1.9]), Verdict::ConsistentSuper);
        assert_eq!(verdict_from(&s, &[-9.0, 3.0, 4.5]), Verdict::Violated(3.0));
        assert_eq!(verdict_from(&s, &[-9.0, 3.0, 3.5]), Verdict::Inconclusive);
        assert_eq!(verdict_from(&s, &[f64::NEG_INFINITY, 0.0, 0.0]), Verdict::ConsistentSub);
    }

    #[test]
    fn poisson_factorial_sd_matches_direct_sum() {
        for (mu, k) in [(0.3, 2), (1.0, 3), (2.5, 4), (0.01, 2)] {
            let pmf = |i: u64| (-mu + i as f64 * f64::ln(mu) - statrs::function::gamma::ln_gamma(i as f64 + 1.0)).exp();
            let (mut m1, mut m2) = (0.0, 0.0);
            for i in 0..200u64 {
                let ff = crate::summaries::falling_factorial(i, k);
                m1 += pmf(i) * ff;
                m2 += pmf(i) * ff * ff;
            }
            let direct = (m2 - m1 * m1).sqrt();
            assert!((poisson_falling_factorial_sd(mu, k) - direct).abs() < 1e-9 * direct.max(1.0), "{mu} {k}");
        }
    }

    #[test]
    fn lattice_verdicts() {
        let w = torus(12.0);
        let scales = [0.25, 0.5, 1.0, 2.0];
        let sub = weak_poisson_test(&spec(SIMPLE), &w, &scales, 3, 150, &RandomStream::new(1)).unwrap();
        for r in &sub {
            assert_eq!(r.verdict, Verdict::ConsistentSub, "{}: {:?}", r.statistic, r.per_scale);
        }
        let sup = weak_poisson_test(&spec(GEOMETRIC), &w, &scales, 3, 150, &RandomStream::new(1)).unwrap();
        for r in &sup {
            assert_eq!(r.verdict, Verdict::ConsistentSuper, "{}: {:?}", r.statistic, r.per_scale);
        }
    }

    #[test]
    fn poisson_is_inconclusive() {
        let w = torus(12.0);
        let reports =
            weak_poisson_test(&spec("poisson(intensity=1)"), &w, &[0.5, 1.0, 2.0], 2, 150, &RandomStream::new(2)).unwrap();
        for r in reports {
            assert!(!matches!(r.verdict, Verdict::Violated(_)), "{r:?}");
        }
    }

    #[test]
    fn compare_is_antisymmetric_and_checks_intensity() {
        let w = torus(10.0);
        let a = spec("perturbed_lattice(spacing=1, replication=binomial(2, 0.25), displacement=uniform_in_cell)");
        let b = spec("perturbed_lattice(spacing=1, replication=poisson(0.5), displacement=uniform_in_cell)");
        let st = RandomStream::new(3);
        let ab = compare_two(&a, &b, &w, Statistic::Voids, &[0.5, 1.0], 100, &st).unwrap();
        let ba = compare_two(&b, &a, &w, Statistic::Voids, &[0.5, 1.0], 100, &st).unwrap();
        assert_eq!(ab.verdict, Verdict::ConsistentSub, "{ab:?}");
        assert_eq!(ba.verdict, Verdict::ConsistentSuper);
        for (x, y) in ab.per_scale.iter().zip(&ba.per_scale) {
            assert_eq!(x.z_score, -y.z_score);
        }
        let same = compare_two(&b, &b, &w, Statistic::FactorialMoment(2), &[1.0], 20, &st).unwrap();
        assert_eq!(same.verdict, Verdict::Inconclusive);
        assert!(matches!(
            compare_two(&a, &spec("poisson(intensity=1)"), &w, Statistic::Voids, &[1.0], 5, &st),
            Err(Error::IntensityMismatch { .. })
        ));
    }

    #[test]
    fn matern_clusters_more_than_poisson() {
        let w = torus(10.0);
        let m = spec("matern(parent_intensity=1, mean_size=1, radius=0.1)");
        let p = spec("poisson(intensity=1)");
        let r = compare_two_with(&m, &p, &w, Statistic::FactorialMoment(2), &[0.1], 400, 300, &RandomStream::new(4)).unwrap();
        assert_eq!(r.verdict, Verdict::ConsistentSuper, "{r:?}");
    }

    #[test]
    fn concentration_rows() {
        let rows = concentration_check(&spec("poisson(intensity=1)"), 2, 0.75, &[100], 4000, &RandomStream::new(5)).unwrap();
        assert!((rows[0].bound - 2.0 * (-10.0f64 / 9.0).exp()).abs() < 1e-12);
        assert_eq!(rows[0].holds, Some(true));
        assert!(rows[0].empirical.value < 0.01);
        let lat = concentration_check(&spec(SIMPLE), 2, 0.75, &[100], 200, &RandomStream::new(5)).unwrap();
        assert_eq!(lat[0].empirical.value, 0.0);
        // power guard
        let g = concentration_check(&spec("poisson(intensity=1)"), 2, 0.99, &[100], 100, &RandomStream::new(5)).unwrap();
        assert_eq!(g[0].holds, None);
        assert!(concentration_check(&spec("poisson(intensity=2)"), 2, 0.75, &[100], 10, &RandomStream::new(5)).is_err());
        assert!(concentration_check(&spec("poisson(intensity=1)"), 2, 0.4, &[100], 10, &RandomStream::new(5)).is_err());
        assert!(concentration_check(&spec("poisson(intensity=1)"), 2, 0.75, &[10], 10, &RandomStream::new(5)).is_err());
    }
}
