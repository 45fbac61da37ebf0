#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

/// Small configurations, one per experiment, quick enough for debug builds.
pub fn small_configs() -> Vec<(&'static str, String)> {
    let lattice = |repl: &str| format!("perturbed_lattice(spacing=1, replication={repl}, lattice=hex)");
    vec![
        ("sample", "seed = 11\n[window]\nside = 10\n[generator]\nspec = poisson(intensity=1)\n[sample]\ncount = 2\n".to_string()),
        (
            "summary",
            "seed = 12\nreplications = 20\n[window]\nside = 10\n[generator]\nspec = poisson(intensity=1)\n[summary]\nstatistic = ripley_k\nradii = 0.2:1.0:0.2\n"
                .to_string(),
        ),
        (
            "compare",
            "seed = 13\nreplications = 10\n[window]\nside = 10\n[generator]\nspec = perturbed_lattice(spacing=1, replication=poisson(lambda=1))\n[generator2]\nspec = poisson(intensity=1)\n[compare]\nstatistics = voids, factorial_moment_2, ripley_k\nscales = 0.5, 1\nplacements = 8\n"
                .to_string(),
        ),
        (
            "percolation",
            format!(
                "seed = 14\nreplications = 5\n[window]\nside = 8\n[generator]\nspec = {}\n[generator2]\nspec = {}\n[percolation]\nradii = 0.3:0.8:0.1\ncritical = true\ntol = 0.05\nk = 2\ngrid_n = 32\n",
                lattice("binomial(n=1, p=1)"),
                lattice("negbinomial(r=1, p=0.5)")
            ),
        ),
        (
            "coverage",
            "seed = 15\nreplications = 5\n[window]\nside = 6\n[generator]\nspec = poisson(intensity=1)\n[generator2]\nspec = perturbed_lattice(spacing=1, replication=binomial(n=1, p=1))\n[coverage]\nradii = 0.5, 1\nks = 1, 2, 3\ngrid_n = 32\n"
                .to_string(),
        ),
        (
            "sinr",
            "seed = 16\nreplications = 5\n[window]\nside = 6\nmetric = euclidean\n[generator]\nspec = poisson(intensity=1)\n[sinr]\nnoise = 0.1\ngammas = 0, 0.05, 0.1\nattenuation = exponential(beta=1)\ndump_graph = true\n"
                .to_string(),
        ),
        (
            "graph",
            "seed = 17\nreplications = 5\n[generator]\nspec = poisson(intensity=1)\n[graph]\nn_list = 50, 100\nradius_scale = 1\nradius_exponent = 0\nks = 3, 4\nmotif = triangle\n"
                .to_string(),
        ),
        (
            "complex",
            "seed = 18\nreplications = 5\n[generator]\nspec = poisson(intensity=1)\n[complex]\nn_list = 20, 40\nradius_scale = 0.5\nradius_exponent = 0\nk = 1\n".to_string(),
        ),
        ("kernel_chain", "[kernel_chain]\nlambda = 1\nn = 6\nm = 4\nrs = 2, 4\n".to_string()),
    ]
}

/// Runs the CLI in-process; returns the exit code.
pub fn run_cli(experiment: &str, config: &Path, out: &Path, extra: &[&str]) -> i32 {
    let mut args: Vec<String> = vec![
        experiment.into(),
        "--config".into(),
        config.display().to_string(),
        "--out".into(),
        out.display().to_string(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    ppclust::cli::main_with_args(&args)
}

/// Every file in `dir` except the manifest, by name.
pub fn outputs(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != ppclust::cli::MANIFEST_NAME)
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect()
}
