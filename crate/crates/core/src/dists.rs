//! Exact discrete count laws and an exact convex-order checker.
//!
//! Two integer-valued laws with equal means are ordered `X <=cx Y` iff the
//! stop-loss transforms satisfy `E(X-a)+ <= E(Y-a)+` for all `a`. Stop-loss
//! functions of lattice laws are piecewise linear with knots at the
//! integers, so checking a half-integer grid up to the support maximum is
//! exact.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma, Geometric, Hypergeometric, Poisson};
use statrs::function::factorial::ln_binomial;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::expr::{call, Args, Expr};
use crate::stream::RandomStream;

pub const DEFAULT_TRUNCATION_TOLERANCE: f64 = 1e-14;
const MEAN_TOLERANCE: f64 = 1e-9;
const STOP_LOSS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum CountLaw {
    Deterministic(u64),
    Binomial { n: u64, p: f64 },
    Poisson { lambda: f64 },
    /// `P(i) = C(r+i-1, i) p^i (1-p)^r`, mean `rp/(1-p)`.
    NegBinomial { r: f64, p: f64 },
    /// `P(i) = p (1-p)^i`, mean `1/p - 1`.
    Geometric { p: f64 },
    /// `P(i) = C(m, i) C(n-m, k-i) / C(n, k)`, mean `km/n`.
    Hypergeometric { n: u64, m: u64, k: u64 },
    Mixture(Vec<(f64, CountDistribution)>),
}

/// A validated count law together with the tail mass below which infinite
/// supports are truncated.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDistribution {
    law: CountLaw,
    truncation_tolerance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CxVerdict {
    /// Ordered; `min_slack` is the smallest `stop_loss(d2) - stop_loss(d1)` seen.
    Holds { min_slack: f64 },
    /// The smallest grid point where `stop_loss(d1) > stop_loss(d2)`.
    Fails { witness: f64 },
    MeansDiffer { mean1: f64, mean2: f64 },
}

impl CxVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, CxVerdict::Holds { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            CxVerdict::Holds { .. } => "holds",
            CxVerdict::Fails { .. } => "fails",
            CxVerdict::MeansDiffer { .. } => "means_differ",
        }
    }
}

fn prob(name: &'static str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::param(name, format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

impl CountDistribution {
    pub fn new(law: CountLaw) -> Result<Self> {
        match &law {
            CountLaw::Deterministic(_) => {}
            CountLaw::Binomial { p, .. } => prob("p", *p)?,
            CountLaw::Poisson { lambda } => {
                if !(lambda.is_finite() && *lambda >= 0.0) {
                    return Err(Error::param("lambda", format!("{lambda} must be finite and >= 0")));
                }
            }
            CountLaw::NegBinomial { r, p } => {
                if !(r.is_finite() && *r > 0.0) {
                    return Err(Error::param("r", format!("{r} must be positive")));
                }
                if !(0.0..1.0).contains(p) {
                    return Err(Error::param("p", format!("{p} outside [0, 1)")));
                }
            }
            CountLaw::Geometric { p } => {
                if !(*p > 0.0 && *p <= 1.0) {
                    return Err(Error::param("p", format!("{p} outside (0, 1]")));
                }
            }
            CountLaw::Hypergeometric { n, m, k } => {
                if m > n || k > n {
                    return Err(Error::param("m, k", format!("need m, k <= n, got n={n} m={m} k={k}")));
                }
            }
            CountLaw::Mixture(parts) => {
                if parts.is_empty() {
                    return Err(Error::param("weights", "mixture needs at least one component"));
                }
                if parts.iter().any(|(w, _)| !(w.is_finite() && *w >= 0.0)) {
                    return Err(Error::param("weights", "weights must be non-negative"));
                }
                let total: f64 = parts.iter().map(|(w, _)| w).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::param("weights", format!("weights sum to {total}, not 1")));
                }
            }
        }
        Ok(Self {
            law,
            truncation_tolerance: DEFAULT_TRUNCATION_TOLERANCE,
        })
    }

    pub fn deterministic(k: u64) -> Self {
        Self::new(CountLaw::Deterministic(k)).expect("always valid")
    }

    pub fn binomial(n: u64, p: f64) -> Result<Self> {
        Self::new(CountLaw::Binomial { n, p })
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        Self::new(CountLaw::Poisson { lambda })
    }

    pub fn neg_binomial(r: f64, p: f64) -> Result<Self> {
        Self::new(CountLaw::NegBinomial { r, p })
    }

    pub fn geometric(p: f64) -> Result<Self> {
        Self::new(CountLaw::Geometric { p })
    }

    pub fn hypergeometric(n: u64, m: u64, k: u64) -> Result<Self> {
        Self::new(CountLaw::Hypergeometric { n, m, k })
    }

    pub fn mixture(parts: Vec<(f64, CountDistribution)>) -> Result<Self> {
        Self::new(CountLaw::Mixture(parts))
    }

    pub fn with_truncation_tolerance(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0 && tol < 1.0) {
            return Err(Error::param("truncation_tolerance", format!("{tol} outside (0, 1)")));
        }
        self.truncation_tolerance = tol;
        Ok(self)
    }

    pub fn law(&self) -> &CountLaw {
        &self.law
    }

    pub fn truncation_tolerance(&self) -> f64 {
        self.truncation_tolerance
    }

    pub fn pmf(&self, i: u64) -> f64 {
        let x = i as f64;
        match &self.law {
            CountLaw::Deterministic(k) => f64::from(u8::from(i == *k)),
            CountLaw::Binomial { n, p } => {
                if i > *n {
                    0.0
                } else if *p == 0.0 || *p == 1.0 {
                    let at = if *p == 0.0 { 0 } else { *n };
                    f64::from(u8::from(i == at))
                } else {
                    (ln_binomial(*n, i) + x * p.ln() + (*n - i) as f64 * (1.0 - p).ln()).exp()
                }
            }
            CountLaw::Poisson { lambda } => {
                if *lambda == 0.0 {
                    f64::from(u8::from(i == 0))
                } else {
                    (-lambda + x * lambda.ln() - ln_gamma(x + 1.0)).exp()
                }
            }
            CountLaw::NegBinomial { r, p } => {
                if *p == 0.0 {
                    f64::from(u8::from(i == 0))
                } else {
                    (ln_gamma(r + x) - ln_gamma(*r) - ln_gamma(x + 1.0) + x * p.ln() + r * (1.0 - p).ln()).exp()
                }
            }
            CountLaw::Geometric { p } => {
                if *p == 1.0 {
                    f64::from(u8::from(i == 0))
                } else {
                    (p.ln() + x * (1.0 - p).ln()).exp()
                }
            }
            CountLaw::Hypergeometric { n, m, k } => {
                let lo = (k + m).saturating_sub(*n);
                if i < lo || i > *m.min(k) {
                    0.0
                } else {
                    (ln_binomial(*m, i) + ln_binomial(n - m, k - i) - ln_binomial(*n, *k)).exp()
                }
            }
            CountLaw::Mixture(parts) => parts.iter().map(|(w, d)| w * d.pmf(i)).sum(),
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.law {
            CountLaw::Deterministic(k) => *k as f64,
            CountLaw::Binomial { n, p } => *n as f64 * p,
            CountLaw::Poisson { lambda } => *lambda,
            CountLaw::NegBinomial { r, p } => r * p / (1.0 - p),
            CountLaw::Geometric { p } => 1.0 / p - 1.0,
            CountLaw::Hypergeometric { n, m, k } => {
                if *n == 0 {
                    0.0
                } else {
                    (*k as f64) * (*m as f64) / (*n as f64)
                }
            }
            CountLaw::Mixture(parts) => parts.iter().map(|(w, d)| w * d.mean()).sum(),
        }
    }

    pub fn has_finite_support(&self) -> bool {
        match &self.law {
            CountLaw::Deterministic(_) | CountLaw::Binomial { .. } | CountLaw::Hypergeometric { .. } => true,
            CountLaw::Poisson { lambda } => *lambda == 0.0,
            CountLaw::NegBinomial { p, .. } => *p == 0.0,
            CountLaw::Geometric { p } => *p == 1.0,
            CountLaw::Mixture(parts) => parts.iter().all(|(_, d)| d.has_finite_support()),
        }
    }

    /// Largest value carrying mass, or for infinite supports the point
    /// beyond which the remaining tail mass is below the truncation tolerance.
    pub fn support_max(&self) -> u64 {
        let tol = self.truncation_tolerance;
        match &self.law {
            CountLaw::Deterministic(k) => *k,
            CountLaw::Binomial { n, p } => {
                if *p == 0.0 {
                    0
                } else {
                    *n
                }
            }
            CountLaw::Hypergeometric { m, k, .. } => *m.min(k),
            CountLaw::Poisson { lambda } => {
                if *lambda == 0.0 {
                    return 0;
                }
                // tail after K <= pmf(K+1) / (1 - lambda/(K+2)) once K+2 > lambda
                let mut k = lambda.ceil() as u64 + 1;
                loop {
                    let ratio = lambda / (k + 2) as f64;
                    if ratio < 1.0 && self.pmf(k + 1) / (1.0 - ratio) < tol {
                        return k;
                    }
                    k += 1;
                }
            }
            CountLaw::Geometric { p } => {
                if *p == 1.0 {
                    return 0;
                }
                // tail after K = (1-p)^(K+1)
                let k = (tol.ln() / (1.0 - p).ln()).ceil() as u64;
                k.max(1)
            }
            CountLaw::NegBinomial { r, p } => {
                if *p == 0.0 {
                    return 0;
                }
                let mut k = self.mean().ceil() as u64 + 1;
                loop {
                    // pmf(i+1)/pmf(i) = p (r+i)/(i+1), decreasing in i towards p
                    let ratio = p * (r + (k + 1) as f64) / (k + 2) as f64;
                    if ratio < 1.0 && self.pmf(k + 1) / (1.0 - ratio) < tol {
                        return k;
                    }
                    k += 1;
                }
            }
            CountLaw::Mixture(parts) => parts.iter().map(|(_, d)| d.support_max()).max().unwrap_or(0),
        }
    }

    /// Stop-loss transform `E(X - a)+`.
    ///
    /// Finite supports are summed directly. Infinite supports use
    /// `E(X-a)+ = mean - a + sum_{i<a} (a-i) P(i)`, which involves only the
    /// finitely many atoms below `a` and needs no tail truncation.
    pub fn stop_loss(&self, a: f64) -> f64 {
        match &self.law {
            CountLaw::Mixture(parts) => parts.iter().map(|(w, d)| w * d.stop_loss(a)).sum(),
            _ if self.has_finite_support() => {
                let start = if a < 0.0 { 0 } else { a.floor() as u64 };
                (start..=self.support_max())
                    .map(|i| i as f64)
                    .filter(|&x| x > a)
                    .map(|x| (x - a) * self.pmf(x as u64))
                    .sum()
            }
            _ => {
                let below: f64 = (0..)
                    .map(|i: u64| i as f64)
                    .take_while(|&x| x < a)
                    .map(|x| (a - x) * self.pmf(x as u64))
                    .sum();
                (self.mean() - a + below).max(0.0)
            }
        }
    }

    /// Draws one value with the exact law.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        match &self.law {
            CountLaw::Deterministic(k) => *k,
            CountLaw::Binomial { n, p } => Binomial::new(*n, *p).expect("validated").sample(rng),
            CountLaw::Poisson { lambda } => poisson_draw(*lambda, rng),
            CountLaw::NegBinomial { r, p } => {
                if *p == 0.0 {
                    return 0;
                }
                let rate = Gamma::new(*r, p / (1.0 - p)).expect("validated").sample(rng);
                poisson_draw(rate, rng)
            }
            CountLaw::Geometric { p } => Geometric::new(*p).expect("validated").sample(rng),
            CountLaw::Hypergeometric { n, m, k } => Hypergeometric::new(*n, *m, *k).expect("validated").sample(rng),
            CountLaw::Mixture(parts) => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (w, d) in parts {
                    acc += w;
                    if u < acc {
                        return d.sample_with(rng);
                    }
                }
                let (_, last) = parts.iter().rev().find(|(w, _)| *w > 0.0).expect("weights sum to one");
                last.sample_with(rng)
            }
        }
    }

    pub fn sample(&self, stream: &RandomStream) -> u64 {
        self.sample_with(&mut stream.rng())
    }

    pub fn to_expr(&self) -> Expr {
        let num = Expr::Number;
        let int = |v: u64| Expr::Number(v as f64);
        match &self.law {
            CountLaw::Deterministic(k) => call("deterministic", vec![(None, int(*k))]),
            CountLaw::Binomial { n, p } => call("binomial", vec![(None, int(*n)), (None, num(*p))]),
            CountLaw::Poisson { lambda } => call("poisson", vec![(None, num(*lambda))]),
            CountLaw::NegBinomial { r, p } => call("negbinomial", vec![(None, num(*r)), (None, num(*p))]),
            CountLaw::Geometric { p } => call("geometric", vec![(None, num(*p))]),
            CountLaw::Hypergeometric { n, m, k } => {
                call("hypergeometric", vec![(None, int(*n)), (None, int(*m)), (None, int(*k))])
            }
            CountLaw::Mixture(parts) => call(
                "mixture",
                parts.iter().map(|(w, d)| (None, Expr::List(vec![num(*w), d.to_expr()]))).collect(),
            ),
        }
    }

    pub fn from_expr(e: &Expr) -> Result<Self> {
        let (name, raw) = e.as_call()?;
        if name == "mixture" {
            let parts = raw
                .iter()
                .map(|a| {
                    let pair = a.value.as_list()?;
                    match pair {
                        [w, d] => Ok((w.as_f64()?, CountDistribution::from_expr(d)?)),
                        _ => Err(Error::Parse("mixture components are `[weight, law]` pairs".into())),
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            return Self::mixture(parts);
        }
        let mut args = Args::new(name, raw);
        let dist = match name {
            "deterministic" => Self::new(CountLaw::Deterministic(args.require("k", 0)?.as_u64()?)),
            "binomial" => Self::binomial(args.require("n", 0)?.as_u64()?, args.require("p", 1)?.as_f64()?),
            "poisson" => Self::poisson(args.require("lambda", 0)?.as_f64()?),
            "negbinomial" => Self::neg_binomial(args.require("r", 0)?.as_f64()?, args.require("p", 1)?.as_f64()?),
            "geometric" => Self::geometric(args.require("p", 0)?.as_f64()?),
            "hypergeometric" => Self::hypergeometric(
                args.require("n", 0)?.as_u64()?,
                args.require("m", 1)?.as_u64()?,
                args.require("k", 2)?.as_u64()?,
            ),
            other => return Err(Error::Parse(format!("unknown count distribution `{other}`"))),
        }?;
        args.finish()?;
        Ok(dist)
    }
}

fn poisson_draw<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    if lambda <= 0.0 {
        return 0;
    }
    let x: f64 = Poisson::new(lambda).expect("positive rate").sample(rng);
    x as u64
}

pub(crate) fn sample_poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> u64 {
    poisson_draw(lambda, rng)
}

impl fmt::Display for CountDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

impl FromStr for CountDistribution {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_expr(&Expr::parse(s)?)
    }
}

/// Exact convex-order check `d1 <=cx d2`.
pub fn check_cx(d1: &CountDistribution, d2: &CountDistribution) -> CxVerdict {
    let (mean1, mean2) = (d1.mean(), d2.mean());
    if (mean1 - mean2).abs() > MEAN_TOLERANCE {
        return CxVerdict::MeansDiffer { mean1, mean2 };
    }
    let a_max = d1.support_max().max(d2.support_max());
    let mut min_slack = f64::INFINITY;
    for step in 0..=(2 * a_max) {
        let a = step as f64 * 0.5;
        let slack = d2.stop_loss(a) - d1.stop_loss(a);
        if slack < -STOP_LOSS_SLACK {
            return CxVerdict::Fails { witness: a };
        }
        min_slack = min_slack.min(slack);
    }
    CxVerdict::Holds { min_slack }
}

/// One comparison within a convex-order chain.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainLink {
    pub chain: &'static str,
    pub smaller: CountDistribution,
    pub larger: CountDistribution,
    pub verdict: CxVerdict,
}

/// Links of a convex-order chain plus notes on links that were skipped or
/// reordered.
#[derive(Debug, Clone, PartialEq)]
pub struct CxChain {
    pub links: Vec<ChainLink>,
    pub notes: Vec<String>,
}

/// Sub-Poisson chain `HGeo(n,m,lambda n/m) <= Binom(m,lambda/m) <= Binom(r,lambda/r) <= Pois(lambda)`.
///
/// Binomial links are ordered by size, so every `r >= lambda` is usable; a
/// size below `m` is noted. The hypergeometric link is skipped (with a
/// note) when `lambda n / m` is not an integer.
pub fn sub_poisson_chain(lambda: f64, n: u64, m: u64, rs: &[u64]) -> Result<CxChain> {
    if !(lambda > 0.0 && lambda <= m as f64 && m <= n) {
        return Err(Error::param("lambda, n, m", format!("need 0 < lambda <= m <= n, got {lambda}, {n}, {m}")));
    }
    if let Some(r) = rs.iter().find(|&&r| (r as f64) < lambda) {
        return Err(Error::param("r", format!("binomial size {r} is below lambda = {lambda}")));
    }
    let mut notes = Vec::new();
    let mut laws = Vec::new();
    let k = lambda * n as f64 / m as f64;
    if (k - k.round()).abs() > 1e-9 {
        notes.push(format!("skipped HGeo({n},{m},{k}): lambda*n/m is not an integer"));
    } else {
        laws.push(CountDistribution::hypergeometric(n, m, k.round() as u64)?);
    }
    for r in rs.iter().filter(|&&r| r < m) {
        notes.push(format!("binomial size r={r} < m={m}: links ordered by size"));
    }
    let mut sizes: Vec<u64> = rs.iter().copied().chain(std::iter::once(m)).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if !laws.is_empty() && sizes[0] != m {
        // the hypergeometric link compares against Binom(m, .) specifically
        laws.clear();
        notes.push(format!("skipped HGeo({n},{m},{k}): a binomial size below m precedes Binom({m},.)"));
    }
    for r in sizes {
        laws.push(CountDistribution::binomial(r, lambda / r as f64)?);
    }
    laws.push(CountDistribution::poisson(lambda)?);
    Ok(CxChain {
        links: links("sub_poisson", laws),
        notes,
    })
}

/// Super-Poisson chain `Pois(lambda) <= NBinom(r2,.) <= NBinom(r1,.) <= Geo(1/(1+lambda)) <= sum_j w_j Geo(p_j)`
/// with `r1 <= r2`, `sum w_j = 1`, `sum w_j / p_j = lambda + 1`.
pub fn super_poisson_chain(lambda: f64, r1: f64, r2: f64, geo_mixture: &[(f64, f64)]) -> Result<CxChain> {
    if r1 > r2 {
        return Err(Error::param("r1, r2", "need r1 <= r2"));
    }
    let target: f64 = geo_mixture.iter().map(|(w, p)| w / p).sum();
    if (target - (lambda + 1.0)).abs() > 1e-9 {
        return Err(Error::param("geo_mixture", format!("sum w/p = {target}, need lambda + 1 = {}", lambda + 1.0)));
    }
    let mixture = CountDistribution::mixture(
        geo_mixture
            .iter()
            .map(|&(w, p)| Ok((w, CountDistribution::geometric(p)?)))
            .collect::<Result<Vec<_>>>()?,
    )?;
    let laws = vec![
        CountDistribution::poisson(lambda)?,
        CountDistribution::neg_binomial(r2, lambda / (r2 + lambda))?,
        CountDistribution::neg_binomial(r1, lambda / (r1 + lambda))?,
        CountDistribution::geometric(1.0 / (1.0 + lambda))?,
        mixture,
    ];
    Ok(CxChain {
        links: links("super_poisson", laws),
        notes: Vec::new(),
    })
}

/// True when two laws have identical pmfs on the combined truncated support.
pub fn same_law(d1: &CountDistribution, d2: &CountDistribution) -> bool {
    let top = d1.support_max().max(d2.support_max());
    (0..=top).all(|i| (d1.pmf(i) - d2.pmf(i)).abs() < 1e-14)
}

fn links(chain: &'static str, laws: Vec<CountDistribution>) -> Vec<ChainLink> {
    laws.windows(2)
        .map(|w| ChainLink {
            chain,
            smaller: w[0].clone(),
            larger: w[1].clone(),
            verdict: check_cx(&w[0], &w[1]),
        })
        .collect()
}
