//! Command-line front end.
//!
//! ```text
//! ppclust <experiment> --config FILE [--seed N] [--threads K] [--plot] [--out DIR] [--section.key VALUE ...]
//! ```
//!
//! Exit codes: 0 on success, 2 for usage or configuration errors, 3 when
//! the experiment itself fails. `PPCLUST_THREADS` sets the default thread
//! count.

pub mod config;
pub mod run;
pub mod svg;

pub use config::{ConfigError, Experiment, ExperimentConfig, Params};
pub use run::{run, MANIFEST_NAME};

use std::path::PathBuf;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;
pub const THREADS_ENV: &str = "PPCLUST_THREADS";

pub const USAGE: &str = "usage: ppclust <experiment> --config FILE [--seed N] [--threads K] [--plot] [--out DIR] [--section.key VALUE ...]
experiments: sample, summary, compare, percolation, coverage, sinr, graph, complex, kernel_chain";

/// Parsed command line.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub experiment: Experiment,
    pub config: PathBuf,
    pub threads: Option<usize>,
    pub overrides: Vec<(String, String)>,
}

fn usage_error(message: impl Into<String>) -> ConfigError {
    ConfigError {
        key: String::new(),
        origin: "command line".into(),
        message: message.into(),
    }
}

/// Parses arguments (without the program name).
pub fn parse_args(args: &[String]) -> Result<Invocation, ConfigError> {
    let mut it = args.iter();
    let experiment = it
        .next()
        .ok_or_else(|| usage_error("missing experiment"))?
        .parse::<Experiment>()
        .map_err(usage_error)?;
    let mut config = None;
    let mut threads = None;
    let mut overrides = Vec::new();
    while let Some(arg) = it.next() {
        let flag = arg.strip_prefix("--").ok_or_else(|| usage_error(format!("unexpected argument `{arg}`")))?;
        let (flag, inline) = match flag.split_once('=') {
            Some((f, v)) => (f, Some(v.to_string())),
            None => (flag, None),
        };
        if flag == "plot" {
            overrides.push(("plot".into(), inline.unwrap_or_else(|| "true".into())));
            continue;
        }
        let value = match inline {
            Some(v) => v,
            None => it.next().cloned().ok_or_else(|| usage_error(format!("--{flag} needs a value")))?,
        };
        match flag {
            "config" => config = Some(PathBuf::from(value)),
            "threads" => {
                let k: usize = value.parse().map_err(|_| usage_error(format!("--threads: `{value}` is not a count")))?;
                if k == 0 {
                    return Err(usage_error("--threads must be at least 1"));
                }
                threads = Some(k);
            }
            "out" => overrides.push(("output_dir".into(), value)),
            "" => return Err(usage_error("empty flag")),
            key => overrides.push((key.to_string(), value)),
        }
    }
    Ok(Invocation {
        experiment,
        config: config.ok_or_else(|| usage_error("--config FILE is required"))?,
        threads,
        overrides,
    })
}

fn default_threads() -> Result<Option<usize>, ConfigError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(k) if k > 0 => Ok(Some(k)),
            _ => Err(ConfigError {
                key: THREADS_ENV.into(),
                origin: "environment".into(),
                message: format!("`{v}` is not a positive count"),
            }),
        },
        Err(_) => Ok(None),
    }
}

/// Full CLI behaviour; returns the process exit code.
pub fn main_with_args(args: &[String]) -> i32 {
    if args.iter().any(|a| a == "--help" || a == "-h") {
        println!("{USAGE}");
        return EXIT_OK;
    }
    let prepared = parse_args(args).and_then(|inv| {
        let text = std::fs::read_to_string(&inv.config).map_err(|e| ConfigError {
            key: String::new(),
            origin: inv.config.display().to_string(),
            message: e.to_string(),
        })?;
        let cfg = ExperimentConfig::parse(&text, Some(inv.experiment), &inv.overrides)?;
        let threads = match inv.threads {
            Some(k) => Some(k),
            None => default_threads()?,
        };
        Ok((cfg, threads))
    });
    let (cfg, threads) = match prepared {
        Ok(p) => p,
        Err(e) => {
            eprintln!("ppclust: configuration error: {e}\n{USAGE}");
            return EXIT_CONFIG;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        pool = pool.num_threads(k);
    }
    let result = match pool.build() {
        Ok(pool) => pool.install(|| run(&cfg)),
        Err(e) => Err(crate::Error::Unsupported(format!("thread pool: {e}"))),
    };
    match result {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("ppclust: {e}");
            EXIT_RUNTIME
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(s: &str) -> Vec<String> {
        s.split_whitespace().map(String::from).collect()
    }

    #[test]
    fn parses_flags_and_overrides() {
        let inv = parse_args(&args("coverage --config c.cfg --seed 4 --threads 2 --plot --out o --coverage.grid_n=64")).unwrap();
        assert_eq!(inv.experiment, Experiment::Coverage);
        assert_eq!(inv.threads, Some(2));
        assert_eq!(
            inv.overrides,
            vec![
                ("seed".to_string(), "4".to_string()),
                ("plot".to_string(), "true".to_string()),
                ("output_dir".to_string(), "o".to_string()),
                ("coverage.grid_n".to_string(), "64".to_string()),
            ]
        );
        assert!(parse_args(&args("coverage")).is_err());
        assert!(parse_args(&args("nope --config c")).is_err());
        assert!(parse_args(&args("sample --config c --threads 0")).is_err());
        assert!(parse_args(&args("sample --config c --seed")).is_err());
    }
}
