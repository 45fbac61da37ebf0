//! Experiment configuration: a flat `key = value` format with `[section]`
//! headers and `#` comments. Keys before the first header belong to `run`.
//!
//! ```text
//! experiment = percolation
//! seed = 7
//! replications = 100
//!
//! [window]
//! side = 30
//! metric = euclidean
//!
//! [generator]
//! spec = poisson(intensity=1.1547)
//!
//! [percolation]
//! radii = 0.30:0.80:0.025
//! ```
//!
//! Lists are comma separated or `start:stop:step` ranges (inclusive).
//! Every key can be overridden from the command line as `--section.key value`.

use std::cell::{Cell, RefCell};
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::compare::{Statistic, DEFAULT_PLACEMENTS};
use crate::error::Error;
use crate::expr::Expr;
use crate::geometry::{Metric, Window};
use crate::graphs::{Motif, RadiusRule, DEFAULT_EXACT_CHROMATIC_LIMIT};
use crate::procgen::GeneratorSpec;
use crate::shotnoise::ResponseFunction;
use crate::summaries::{LaplaceSign, RegionShape};

/// Configuration problems, reported with the key and where it was set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub key: String,
    pub origin: String,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.key.is_empty() {
            write!(f, "{}: {}", self.origin, self.message)
        } else {
            write!(f, "{}: key `{}`: {}", self.origin, self.key, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Sample,
    Summary,
    Compare,
    Percolation,
    Coverage,
    Sinr,
    Graph,
    Complex,
    KernelChain,
}

impl Experiment {
    pub const ALL: [Experiment; 9] = [
        Experiment::Sample,
        Experiment::Summary,
        Experiment::Compare,
        Experiment::Percolation,
        Experiment::Coverage,
        Experiment::Sinr,
        Experiment::Graph,
        Experiment::Complex,
        Experiment::KernelChain,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Sample => "sample",
            Experiment::Summary => "summary",
            Experiment::Compare => "compare",
            Experiment::Percolation => "percolation",
            Experiment::Coverage => "coverage",
            Experiment::Sinr => "sinr",
            Experiment::Graph => "graph",
            Experiment::Complex => "complex",
            Experiment::KernelChain => "kernel_chain",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| format!("unknown experiment `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SummaryStatistic {
    RipleyK,
    PairCorrelation,
    Voids,
    FactorialMoment,
    Laplace,
    Variance,
}

impl FromStr for SummaryStatistic {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "ripley_k" => SummaryStatistic::RipleyK,
            "pair_correlation" => SummaryStatistic::PairCorrelation,
            "voids" => SummaryStatistic::Voids,
            "factorial_moment" => SummaryStatistic::FactorialMoment,
            "laplace" => SummaryStatistic::Laplace,
            "variance" => SummaryStatistic::Variance,
            _ => return Err(format!("unknown statistic `{s}`")),
        })
    }
}

/// Experiment-specific parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum Params {
    Sample {
        count: usize,
    },
    Summary {
        statistic: SummaryStatistic,
        radii: Vec<f64>,
        bandwidth: f64,
        k: u32,
        shape: RegionShape,
        placements: usize,
        height: f64,
        sign: LaplaceSign,
    },
    Compare {
        statistics: Vec<Statistic>,
        scales: Vec<f64>,
        placements: usize,
    },
    Percolation {
        radii: Vec<f64>,
        critical: bool,
        tol: f64,
        k: u32,
        grid_n: usize,
    },
    Coverage {
        radii: Vec<f64>,
        ks: Vec<u32>,
        grid_n: usize,
    },
    Sinr {
        power: f64,
        noise: f64,
        threshold: f64,
        gammas: Vec<f64>,
        attenuation: ResponseFunction,
        dump_graph: bool,
    },
    Graph {
        n_list: Vec<usize>,
        rule: RadiusRule,
        ks: Vec<usize>,
        exact_chromatic_limit: usize,
        motif: Option<Motif>,
    },
    Complex {
        n_list: Vec<usize>,
        rule: RadiusRule,
        k: usize,
    },
    KernelChain {
        lambda: f64,
        n: u64,
        m: u64,
        rs: Vec<u64>,
        r1: f64,
        r2: f64,
        geo_mixture: Vec<(f64, f64)>,
    },
}

/// Fully validated configuration for one run.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub seed: u64,
    pub replications: usize,
    pub output_dir: PathBuf,
    pub plot: bool,
    pub window: Option<Window>,
    pub dim: usize,
    pub generators: Vec<GeneratorSpec>,
    pub params: Params,
    resolved: Vec<(String, String, String)>,
}

struct Entry {
    section: String,
    key: String,
    value: String,
    origin: String,
    used: Cell<bool>,
}

/// Raw entries plus a record of every value read, for the manifest.
struct Table {
    entries: Vec<Entry>,
    resolved: RefCell<Vec<(String, String, String)>>,
}

fn config_error(key: &str, origin: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.to_string(),
        origin: origin.to_string(),
        message: message.into(),
    }
}

impl Table {
    fn parse(text: &str, overrides: &[(String, String)]) -> Result<Table, ConfigError> {
        let mut entries: Vec<Entry> = Vec::new();
        let mut section = "run".to_string();
        for (i, raw) in text.lines().enumerate() {
            let origin = format!("line {}", i + 1);
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| config_error("", &origin, "unterminated section header"))?
                    .trim();
                if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                    return Err(config_error("", &origin, format!("bad section name `{name}`")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| config_error("", &origin, format!("expected `key = value`, found `{line}`")))?;
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(config_error(key, &origin, "bad key name"));
            }
            if entries.iter().any(|e| e.section == section && e.key == key) {
                return Err(config_error(&format!("{section}.{key}"), &origin, "set twice"));
            }
            entries.push(Entry {
                section: section.clone(),
                key: key.to_string(),
                value: value.trim().to_string(),
                origin,
                used: Cell::new(false),
            });
        }
        for (k, v) in overrides {
            let (section, key) = k.split_once('.').unwrap_or(("run", k));
            entries.retain(|e| !(e.section == section && e.key == key));
            entries.push(Entry {
                section: section.to_string(),
                key: key.to_string(),
                value: v.trim().to_string(),
                origin: format!("command line --{k}"),
                used: Cell::new(false),
            });
        }
        Ok(Table {
            entries,
            resolved: RefCell::new(Vec::new()),
        })
    }

    fn find(&self, section: &str, key: &str) -> Option<&Entry> {
        self.entries.iter().find(|e| e.section == section && e.key == key)
    }

    fn has(&self, section: &str, key: &str) -> bool {
        self.find(section, key).is_some()
    }

    /// Reads a key (or its default) and records the text used.
    fn get<T>(&self, section: &str, key: &str, default: Option<&str>, parse: impl Fn(&str) -> Result<T, String>) -> Result<T, ConfigError> {
        let full = if section == "run" { key.to_string() } else { format!("{section}.{key}") };
        let (text, origin) = match self.find(section, key) {
            Some(e) => {
                e.used.set(true);
                (e.value.clone(), e.origin.clone())
            }
            None => match default {
                Some(d) => (d.to_string(), "default".to_string()),
                None => return Err(config_error(&full, "configuration", "required key is missing")),
            },
        };
        let value = parse(&text).map_err(|m| config_error(&full, &origin, m))?;
        self.resolved.borrow_mut().push((section.to_string(), key.to_string(), text));
        Ok(value)
    }

    fn unused(&self, experiment: Experiment) -> Result<(), ConfigError> {
        match self.entries.iter().find(|e| !e.used.get()) {
            Some(e) => Err(config_error(
                &format!("{}.{}", e.section, e.key),
                &e.origin,
                format!("unknown key for experiment `{experiment}`"),
            )),
            None => Ok(()),
        }
    }
}

fn number(s: &str) -> Result<f64, String> {
    let x: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !x.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(x)
}

fn integer(s: &str) -> Result<u64, String> {
    s.trim().parse().map_err(|_| format!("`{s}` is not a non-negative integer"))
}

fn count(s: &str) -> Result<usize, String> {
    let n = integer(s)? as usize;
    if n == 0 {
        return Err("must be at least 1".into());
    }
    Ok(n)
}

fn boolean(s: &str) -> Result<bool, String> {
    match s.trim() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(format!("`{other}` is not true or false")),
    }
}

/// `a, b, c` (optionally bracketed) or an inclusive range `start:stop:step`.
pub fn number_list(s: &str) -> Result<Vec<f64>, String> {
    let s = s.trim();
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let (a, b, step) = (number(parts[0])?, number(parts[1])?, number(parts[2])?);
        if !(step > 0.0 && b >= a) {
            return Err(format!("range `{s}` needs start <= stop and a positive step"));
        }
        let n = ((b - a) / step).round();
        if (a + n * step - b).abs() > 1e-9 * step.max(b.abs()) {
            return Err(format!("range `{s}` does not land on its stop value"));
        }
        if n > 1e6 {
            return Err(format!("range `{s}` is too long"));
        }
        return Ok((0..=n as usize).map(|i| a + i as f64 * step).collect());
    }
    let inner = s.strip_prefix('[').and_then(|t| t.strip_suffix(']')).unwrap_or(s);
    let v: Vec<f64> = inner.split(',').map(number).collect::<Result<_, _>>()?;
    Ok(v)
}

fn integer_list(s: &str) -> Result<Vec<u64>, String> {
    let v = number_list(s)?;
    v.iter()
        .map(|x| if *x >= 0.0 && x.fract() == 0.0 { Ok(*x as u64) } else { Err(format!("{x} is not a non-negative integer")) })
        .collect()
}

fn increasing(v: Vec<f64>) -> Result<Vec<f64>, String> {
    if v.windows(2).any(|w| w[1] <= w[0]) {
        return Err("values must be strictly increasing".into());
    }
    Ok(v)
}

fn err_string(e: Error) -> String {
    e.to_string()
}

fn parse_window(t: &Table) -> Result<Window, ConfigError> {
    let metric = t.get("window", "metric", Some("periodic"), |s| match s {
        "periodic" => Ok(Metric::Periodic),
        "euclidean" => Ok(Metric::Euclidean),
        other => Err(format!("unknown metric `{other}`")),
    })?;
    if t.has("window", "lower") || t.has("window", "upper") {
        if t.has("window", "side") || t.has("window", "dim") {
            return Err(config_error("window.lower", "configuration", "give either lower/upper or dim/side, not both"));
        }
        let lower = t.get("window", "lower", None, number_list)?;
        let upper = t.get("window", "upper", None, number_list)?;
        return Window::new(lower, upper, metric).map_err(|e| config_error("window.upper", "configuration", e.to_string()));
    }
    let dim = t.get("window", "dim", Some("2"), count)?;
    let side = t.get("window", "side", Some("10"), number)?;
    Window::cube(dim, side, metric).map_err(|e| config_error("window.side", "configuration", e.to_string()))
}

fn parse_generator(t: &Table, section: &str, required: bool) -> Result<Option<GeneratorSpec>, ConfigError> {
    if !required && !t.has(section, "spec") {
        return Ok(None);
    }
    t.get(section, "spec", None, |s| s.parse::<GeneratorSpec>().map_err(err_string)).map(Some)
}

fn parse_rule(t: &Table, section: &str) -> Result<RadiusRule, ConfigError> {
    let rule = RadiusRule {
        scale: t.get(section, "radius_scale", Some("1"), number)?,
        exponent: t.get(section, "radius_exponent", Some("-1"), number)?,
    };
    rule.validate().map_err(|e| config_error(&format!("{section}.radius_scale"), "configuration", e.to_string()))?;
    Ok(rule)
}

impl ExperimentConfig {
    /// Parses and validates a configuration. `experiment`, when given (from
    /// the command line), must agree with the file.
    pub fn parse(text: &str, experiment: Option<Experiment>, overrides: &[(String, String)]) -> Result<Self, ConfigError> {
        let t = Table::parse(text, overrides)?;
        let from_file = t.find("run", "experiment").map(|e| e.value.clone());
        let experiment = match (experiment, from_file) {
            (Some(e), Some(f)) if e.name() != f => {
                return Err(config_error("experiment", "configuration", format!("file says `{f}` but `{e}` was requested")));
            }
            (Some(e), _) => {
                if let Some(entry) = t.find("run", "experiment") {
                    entry.used.set(true);
                }
                t.resolved.borrow_mut().push(("run".into(), "experiment".into(), e.name().into()));
                e
            }
            (None, _) => t.get("run", "experiment", None, |s| s.parse())?,
        };
        let seed = t.get("run", "seed", Some("0"), integer)?;
        let replications = t.get("run", "replications", Some("100"), count)?;
        let output_dir = t.get("run", "output_dir", Some("out"), |s| Ok(PathBuf::from(s)))?;
        let plot = t.get("run", "plot", Some("false"), boolean)?;

        let uses_window = !matches!(experiment, Experiment::Graph | Experiment::Complex | Experiment::KernelChain);
        let window = if uses_window { Some(parse_window(&t)?) } else { None };
        let dim = match (&window, experiment) {
            (Some(w), _) => w.dim(),
            (None, Experiment::KernelChain) => 1,
            (None, _) => t.get("window", "dim", Some("2"), count)?,
        };
        let mut generators = Vec::new();
        if experiment != Experiment::KernelChain {
            generators.extend(parse_generator(&t, "generator", true)?);
            if matches!(experiment, Experiment::Compare | Experiment::Percolation | Experiment::Coverage | Experiment::Sinr) {
                generators.extend(parse_generator(&t, "generator2", false)?);
            }
        }

        let s = experiment.name();
        let params = match experiment {
            Experiment::Sample => Params::Sample {
                count: t.get(s, "count", Some("1"), count)?,
            },
            Experiment::Summary => {
                let statistic = t.get(s, "statistic", Some("ripley_k"), |v| v.parse())?;
                let radii = t.get(s, "radii", None, |v| increasing(number_list(v)?))?;
                let default_bw = crate::summaries::default_bandwidth(&radii).to_string();
                let uses = |x: &[SummaryStatistic]| x.contains(&statistic);
                Params::Summary {
                    statistic,
                    bandwidth: if uses(&[SummaryStatistic::PairCorrelation]) {
                        t.get(s, "bandwidth", Some(&default_bw), number)?
                    } else {
                        0.0
                    },
                    k: if uses(&[SummaryStatistic::FactorialMoment]) {
                        t.get(s, "k", Some("2"), |v| integer(v).map(|k| k as u32))?
                    } else {
                        0
                    },
                    shape: if uses(&[SummaryStatistic::Voids]) {
                        t.get(s, "shape", Some("ball"), |v| match v {
                            "ball" => Ok(RegionShape::Ball),
                            "box" => Ok(RegionShape::Box),
                            o => Err(format!("unknown shape `{o}`")),
                        })?
                    } else {
                        RegionShape::Ball
                    },
                    placements: if uses(&[SummaryStatistic::Voids, SummaryStatistic::FactorialMoment, SummaryStatistic::Variance]) {
                        t.get(s, "placements", Some(&DEFAULT_PLACEMENTS.to_string()), count)?
                    } else {
                        0
                    },
                    height: if uses(&[SummaryStatistic::Laplace]) { t.get(s, "height", Some("1"), number)? } else { 0.0 },
                    sign: if uses(&[SummaryStatistic::Laplace]) {
                        t.get(s, "sign", Some("minus"), |v| match v {
                            "minus" => Ok(LaplaceSign::Minus),
                            "plus" => Ok(LaplaceSign::Plus),
                            o => Err(format!("unknown sign `{o}`")),
                        })?
                    } else {
                        LaplaceSign::Minus
                    },
                    radii,
                }
            }
            Experiment::Compare => Params::Compare {
                statistics: t.get(s, "statistics", Some("voids, factorial_moment_2, factorial_moment_3"), |v| {
                    v.split(',').map(|x| x.trim().parse::<Statistic>().map_err(err_string)).collect()
                })?,
                scales: t.get(s, "scales", None, |v| increasing(number_list(v)?))?,
                placements: t.get(s, "placements", Some(&DEFAULT_PLACEMENTS.to_string()), count)?,
            },
            Experiment::Percolation => {
                let radii = t.get(s, "radii", None, |v| increasing(number_list(v)?))?;
                let critical = t.get(s, "critical", Some("false"), boolean)?;
                let tol = if critical { t.get(s, "tol", Some("0.02"), number)? } else { 0.0 };
                let k = t.get(s, "k", Some("0"), |v| integer(v).map(|k| k as u32))?;
                let grid_n = if k > 0 { t.get(s, "grid_n", Some("128"), count)? } else { 0 };
                Params::Percolation { radii, critical, tol, k, grid_n }
            }
            Experiment::Coverage => Params::Coverage {
                radii: t.get(s, "radii", None, |v| increasing(number_list(v)?))?,
                ks: t.get(s, "ks", Some("1, 2, 3, 4, 5, 6"), |v| integer_list(v).map(|x| x.into_iter().map(|k| k as u32).collect()))?,
                grid_n: t.get(s, "grid_n", Some("128"), count)?,
            },
            Experiment::Sinr => Params::Sinr {
                power: t.get(s, "power", Some("1"), number)?,
                noise: t.get(s, "noise", Some("0.1"), number)?,
                threshold: t.get(s, "threshold", Some("1"), number)?,
                gammas: t.get(s, "gammas", Some("0"), number_list)?,
                attenuation: t.get(s, "attenuation", Some("exponential(beta=1)"), |v| v.parse::<ResponseFunction>().map_err(err_string))?,
                dump_graph: t.get(s, "dump_graph", Some("false"), boolean)?,
            },
            Experiment::Graph => Params::Graph {
                n_list: t.get(s, "n_list", None, |v| integer_list(v).map(|x| x.into_iter().map(|n| n as usize).collect()))?,
                rule: parse_rule(&t, s)?,
                ks: t.get(s, "ks", Some("2"), |v| integer_list(v).map(|x| x.into_iter().map(|n| n as usize).collect()))?,
                exact_chromatic_limit: t.get(s, "exact_chromatic_limit", Some(&DEFAULT_EXACT_CHROMATIC_LIMIT.to_string()), |v| {
                    integer(v).map(|n| n as usize)
                })?,
                motif: t.get(s, "motif", Some("none"), |v| if v == "none" { Ok(None) } else { Motif::named(v).map(Some).map_err(err_string) })?,
            },
            Experiment::Complex => Params::Complex {
                n_list: t.get(s, "n_list", None, |v| integer_list(v).map(|x| x.into_iter().map(|n| n as usize).collect()))?,
                rule: parse_rule(&t, s)?,
                k: t.get(s, "k", Some("1"), |v| integer(v).map(|n| n as usize))?,
            },
            Experiment::KernelChain => Params::KernelChain {
                lambda: t.get(s, "lambda", Some("1"), number)?,
                n: t.get(s, "n", Some("6"), integer)?,
                m: t.get(s, "m", Some("4"), integer)?,
                rs: t.get(s, "rs", Some("2, 4"), integer_list)?,
                r1: t.get(s, "r1", Some("1"), number)?,
                r2: t.get(s, "r2", Some("2"), number)?,
                geo_mixture: t.get(s, "geo_mixture", Some("[0.25, 0.25], [0.75, 0.75]"), |v| {
                    let e = Expr::parse(&format!("[{v}]")).map_err(err_string)?;
                    e.as_list()
                        .map_err(err_string)?
                        .iter()
                        .map(|pair| match pair.as_list().map_err(err_string)? {
                            [w, p] => Ok((w.as_f64().map_err(err_string)?, p.as_f64().map_err(err_string)?)),
                            _ => Err("each component is [weight, p]".to_string()),
                        })
                        .collect()
                })?,
            },
        };
        if let (Params::Compare { statistics, .. }, 1) = (&params, generators.len()) {
            if let Some(s) = statistics.iter().find(|s| !matches!(s, Statistic::Voids | Statistic::FactorialMoment(2..=4))) {
                return Err(config_error(
                    "compare.statistics",
                    "configuration",
                    format!("`{s}` has no Poisson reference here; give [generator2] or use voids / factorial_moment_2..4"),
                ));
            }
        }
        t.unused(experiment)?;
        let resolved = t.resolved.into_inner();
        Ok(ExperimentConfig {
            experiment,
            seed,
            replications,
            output_dir,
            plot,
            window,
            dim,
            generators,
            params,
            resolved,
        })
    }

    /// The resolved configuration, defaults included, in the input format.
    pub fn manifest(&self) -> String {
        let mut out = format!("# ppclust {} resolved configuration\n", env!("CARGO_PKG_VERSION"));
        let mut sections: Vec<&str> = Vec::new();
        for (s, _, _) in &self.resolved {
            if !sections.contains(&s.as_str()) {
                sections.push(s);
            }
        }
        for s in sections {
            if s != "run" {
                out.push_str(&format!("\n[{s}]\n"));
            }
            for (_, k, v) in self.resolved.iter().filter(|(sec, _, _)| sec == s) {
                out.push_str(&format!("{k} = {v}\n"));
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PERCOLATION: &str = "experiment = percolation\nseed = 3\n\n[window]\nside = 20\nmetric = euclidean\n\n[generator]\nspec = poisson(intensity=1)  # unit rate\n\n[percolation]\nradii = 0.3:0.5:0.1\n";

    #[test]
    fn parses_and_fills_defaults() {
        let c = ExperimentConfig::parse(PERCOLATION, None, &[]).unwrap();
        assert_eq!(c.experiment, Experiment::Percolation);
        assert_eq!(c.seed, 3);
        assert_eq!(c.replications, 100);
        assert_eq!(c.window.as_ref().unwrap().volume(), 400.0);
        match &c.params {
            Params::Percolation { radii, critical, .. } => {
                assert_eq!(radii.len(), 3);
                assert!(!critical);
            }
            other => panic!("{other:?}"),
        }
        let m = c.manifest();
        assert!(m.contains("replications = 100"));
        assert!(m.contains("[percolation]\nradii = 0.3:0.5:0.1\ncritical = false\nk = 0\n"));
        let again = ExperimentConfig::parse(&m, None, &[]).unwrap();
        assert_eq!(again.manifest(), m);
        assert_eq!(again.params, c.params);
    }

    #[test]
    fn overrides_replace_values() {
        let c = ExperimentConfig::parse(PERCOLATION, None, &[("seed".into(), "9".into()), ("window.side".into(), "12".into())]).unwrap();
        assert_eq!(c.seed, 9);
        assert_eq!(c.window.unwrap().side(0), 12.0);
    }

    #[test]
    fn errors_name_key_and_line() {
        let bad = PERCOLATION.replace("side = 20", "sides = 20");
        let e = ExperimentConfig::parse(&bad, None, &[]).unwrap_err();
        assert_eq!((e.key.as_str(), e.origin.as_str()), ("window.sides", "line 5"));
        let bad = PERCOLATION.replace("seed = 3", "seed = -3");
        let e = ExperimentConfig::parse(&bad, None, &[]).unwrap_err();
        assert_eq!((e.key.as_str(), e.origin.as_str()), ("seed", "line 2"));
        let bad = PERCOLATION.replace("radii = 0.3:0.5:0.1", "radii = 0.5, 0.3");
        assert_eq!(ExperimentConfig::parse(&bad, None, &[]).unwrap_err().key, "percolation.radii");
        let e = ExperimentConfig::parse(PERCOLATION, Some(Experiment::Sample), &[]).unwrap_err();
        assert_eq!(e.key, "experiment");
        let e = ExperimentConfig::parse("experiment = sample\n[generator]\nspec = poisson(1)\n[percolation]\nradii = 1\n", None, &[]).unwrap_err();
        assert_eq!(e.key, "percolation.radii");
        let e = ExperimentConfig::parse("experiment = sample\nseed = 1\nseed = 2\n", None, &[]).unwrap_err();
        assert_eq!(e.origin, "line 3");
        assert!(ExperimentConfig::parse("experiment = sample\n", None, &[]).unwrap_err().message.contains("required"));
    }

    #[test]
    fn lists_and_ranges() {
        assert_eq!(number_list("1, 2.5,4").unwrap(), vec![1.0, 2.5, 4.0]);
        assert_eq!(number_list("[1, 2]").unwrap(), vec![1.0, 2.0]);
        assert_eq!(number_list("0.30:0.80:0.025").unwrap().len(), 21);
        assert!(number_list("0:1:0.3").is_err());
        assert!(number_list("1, x").is_err());
    }

    #[test]
    fn kernel_chain_needs_no_window() {
        let c = ExperimentConfig::parse("experiment = kernel_chain\n", None, &[]).unwrap();
        assert!(c.window.is_none() && c.generators.is_empty());
        assert!(ExperimentConfig::parse("experiment = kernel_chain\n[window]\nside = 3\n", None, &[]).is_err());
        match c.params {
            Params::KernelChain { geo_mixture, .. } => assert_eq!(geo_mixture, vec![(0.25, 0.25), (0.75, 0.75)]),
            _ => unreachable!(),
        }
    }
}
