//! Experiment runners: each writes CSV tables (and optional SVG plots) into
//! the output directory, next to the resolved configuration.

use std::fs;
use std::path::PathBuf;

use super::config::{ExperimentConfig, Params, SummaryStatistic};
use super::svg::{line_chart, Series};
use crate::compare::{compare_two_with, weak_poisson_test_with, OrderingReport, Statistic};
use crate::complexes::betti_scaling_experiment;
use crate::dists::{sub_poisson_chain, super_poisson_chain, CxVerdict};
use crate::error::{Error, Result};
use crate::geometry::Window;
use crate::graphs::{mean_motif_count, scaling_experiment, scaling_window};
use crate::percolation::{
    check_percolation_bounds, component_fraction_sweep, components, critical_radius, crossing_sweep, k_percolation_sweep, sinr_graph,
    BoundVerdict, SinrParams,
};
use crate::procgen::io::{write_pattern_csv, PatternMetadata};
use crate::procgen::{sample, GeneratorSpec};
use crate::shotnoise::{coverage_crossing, k_covered_volumes};
use crate::stats::{try_replicate, CurveEstimate, EstimateWithError};
use crate::stream::RandomStream;
use crate::summaries::{
    count_variance, factorial_moment_curve, laplace_functional, pair_correlation, ripley_k, void_curve, TestFunction,
};
use crate::textio::fmt_f64;

pub const MANIFEST_NAME: &str = "manifest.cfg";

struct Outputs {
    dir: PathBuf,
    plot: bool,
    files: Vec<PathBuf>,
}

impl Outputs {
    fn write(&mut self, name: &str, text: &str) -> Result<()> {
        let path = self.dir.join(name);
        fs::write(&path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        self.files.push(path);
        Ok(())
    }

    fn plot(&mut self, name: &str, chart: impl FnOnce() -> String) -> Result<()> {
        if self.plot {
            self.write(name, &chart())?;
        }
        Ok(())
    }
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn table(header: &[String], rows: &[Vec<String>]) -> String {
    let mut s = header.iter().map(|h| quote(h)).collect::<Vec<_>>().join(",");
    s.push('\n');
    for row in rows {
        s.push_str(&row.iter().map(|f| quote(f)).collect::<Vec<_>>().join(","));
        s.push('\n');
    }
    s
}

fn strings(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn values(xs: &[EstimateWithError]) -> Vec<f64> {
    xs.iter().map(|e| e.value).collect()
}

/// Column suffix distinguishing the first and second generator.
fn suffix(j: usize, families: usize) -> String {
    if families > 1 {
        format!("_{}", j + 1)
    } else {
        String::new()
    }
}

/// Runs the configured experiment and returns the files written.
pub fn run(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(&cfg.output_dir).map_err(|e| Error::Io(format!("{}: {e}", cfg.output_dir.display())))?;
    let mut out = Outputs {
        dir: cfg.output_dir.clone(),
        plot: cfg.plot,
        files: Vec::new(),
    };
    out.write(MANIFEST_NAME, &cfg.manifest())?;
    let stream = RandomStream::new(cfg.seed).derive_named(cfg.experiment.name());
    let reps = cfg.replications;
    let window = || cfg.window.as_ref().ok_or_else(|| Error::param("window", "experiment needs a window"));
    match &cfg.params {
        Params::Sample { count } => run_sample(&mut out, cfg, window()?, *count, &stream)?,
        Params::Summary { .. } => run_summary(&mut out, cfg, window()?, reps, &stream)?,
        Params::Compare { statistics, scales, placements } => {
            run_compare(&mut out, &cfg.generators, window()?, statistics, scales, *placements, reps, &stream)?
        }
        Params::Percolation { .. } => run_percolation(&mut out, cfg, window()?, reps, &stream)?,
        Params::Coverage { radii, ks, grid_n } => run_coverage(&mut out, &cfg.generators, window()?, radii, ks, *grid_n, reps, &stream)?,
        Params::Sinr { .. } => run_sinr(&mut out, cfg, window()?, reps, &stream)?,
        Params::Graph { .. } => run_graph(&mut out, cfg, reps, &stream)?,
        Params::Complex { n_list, rule, k } => {
            let rows = betti_scaling_experiment(&cfg.generators[0], cfg.dim, *rule, n_list, *k, reps, &stream)?;
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| vec![r.n.to_string(), fmt_f64(r.mean_betti.value), fmt_f64(r.p_zero.value), fmt_f64(r.mean_betti.std_error)])
                .collect();
            out.write("complex.csv", &table(&strings(&["n", "mean_betti", "p_zero", "std_error"]), &body))?;
            out.plot("complex.svg", || {
                let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
                let mean: Vec<f64> = rows.iter().map(|r| r.mean_betti.value).collect();
                let p0: Vec<f64> = rows.iter().map(|r| r.p_zero.value).collect();
                line_chart(
                    &format!("Betti number beta_{k}"),
                    "n",
                    "value",
                    &[Series::new("mean beta", &ns, &mean), Series::new("P(beta = 0)", &ns, &p0)],
                    true,
                )
            })?;
        }
        Params::KernelChain { lambda, n, m, rs, r1, r2, geo_mixture } => {
            let chains = [sub_poisson_chain(*lambda, *n, *m, rs)?, super_poisson_chain(*lambda, *r1, *r2, geo_mixture)?];
            let mut body = Vec::new();
            let mut notes = Vec::new();
            for c in &chains {
                notes.extend(c.notes.iter().cloned());
                for l in &c.links {
                    let slack = match l.verdict {
                        CxVerdict::Holds { min_slack } => fmt_f64(min_slack),
                        CxVerdict::Fails { witness } => {
                            notes.push(format!("{} <= {} fails at a = {}", l.smaller, l.larger, witness));
                            fmt_f64(f64::NAN)
                        }
                        CxVerdict::MeansDiffer { mean1, mean2 } => {
                            notes.push(format!("{} and {} have means {} and {}", l.smaller, l.larger, mean1, mean2));
                            fmt_f64(f64::NAN)
                        }
                    };
                    body.push(vec![l.chain.to_string(), l.smaller.to_string(), l.larger.to_string(), l.verdict.label().to_string(), slack]);
                }
            }
            out.write("kernel_chain.csv", &table(&strings(&["chain", "smaller", "larger", "verdict", "min_slack"]), &body))?;
            let mut text = notes.join("\n");
            if !text.is_empty() {
                text.push('\n');
            }
            out.write("notes.txt", &text)?;
        }
    }
    Ok(out.files)
}

fn run_sample(out: &mut Outputs, cfg: &ExperimentConfig, w: &Window, count: usize, stream: &RandomStream) -> Result<()> {
    let spec = &cfg.generators[0];
    for i in 0..count {
        let st = stream.derive(i as u64);
        let p = sample(spec, w, &st)?;
        let mut csv = Vec::new();
        write_pattern_csv(&p, &mut csv)?;
        let meta = PatternMetadata {
            spec: spec.to_string(),
            window: w.clone(),
            seed: cfg.seed,
            path: st.path().to_vec(),
            points: p.len(),
        };
        let stem = if count == 1 { "pattern".to_string() } else { format!("pattern_{i}") };
        out.write(&format!("{stem}.csv"), &String::from_utf8(csv).map_err(|e| Error::Io(e.to_string()))?)?;
        out.write(&format!("{stem}.meta"), &meta.to_text())?;
    }
    Ok(())
}

fn run_summary(out: &mut Outputs, cfg: &ExperimentConfig, w: &Window, reps: usize, stream: &RandomStream) -> Result<()> {
    let Params::Summary { statistic, radii, bandwidth, k, shape, placements, height, sign } = &cfg.params else {
        unreachable!()
    };
    let spec = &cfg.generators[0];
    let curve = match statistic {
        SummaryStatistic::RipleyK => ripley_k(spec, w, radii, reps, stream)?,
        SummaryStatistic::PairCorrelation => pair_correlation(spec, w, radii, *bandwidth, reps, stream)?,
        SummaryStatistic::Voids => void_curve(spec, w, *shape, radii, *placements, reps, stream)?,
        SummaryStatistic::FactorialMoment => factorial_moment_curve(spec, w, radii, *k, *placements, reps, stream)?,
        SummaryStatistic::Laplace => {
            let est = radii
                .iter()
                .map(|r| {
                    let f = TestFunction::BallIndicator {
                        center: w.center(),
                        radius: *r,
                        height: *height,
                    };
                    laplace_functional(spec, w, &f, *sign, reps, stream)
                })
                .collect::<Result<Vec<_>>>()?;
            CurveEstimate::new(radii.clone(), est)?
        }
        SummaryStatistic::Variance => {
            let est = radii
                .iter()
                .map(|s| count_variance(spec, w, *s, *placements, reps, stream))
                .collect::<Result<Vec<_>>>()?;
            CurveEstimate::new(radii.clone(), est)?
        }
    };
    let body: Vec<Vec<String>> = curve
        .abscissa
        .iter()
        .zip(&curve.estimates)
        .map(|(r, e)| vec![fmt_f64(*r), fmt_f64(e.value), fmt_f64(e.std_error), e.replications.to_string()])
        .collect();
    out.write("summary.csv", &table(&strings(&["r", "estimate", "std_error", "replications"]), &body))?;
    out.plot("summary.svg", || {
        line_chart(
            &format!("{spec}"),
            "r",
            "estimate",
            &[Series::new(format!("{statistic:?}"), &curve.abscissa, &values(&curve.estimates))],
            false,
        )
    })
}

#[allow(clippy::too_many_arguments)]
fn run_compare(
    out: &mut Outputs,
    generators: &[GeneratorSpec],
    w: &Window,
    statistics: &[Statistic],
    scales: &[f64],
    placements: usize,
    reps: usize,
    stream: &RandomStream,
) -> Result<()> {
    let reports: Vec<OrderingReport> = if let [a, b] = generators {
        statistics
            .iter()
            .map(|s| compare_two_with(a, b, w, *s, scales, placements, reps, &stream.derive_named(&s.to_string())))
            .collect::<Result<_>>()?
    } else {
        let k_max = statistics
            .iter()
            .map(|s| if let Statistic::FactorialMoment(k) = s { *k } else { 2 })
            .max()
            .unwrap_or(2)
            .max(2);
        let all = weak_poisson_test_with(&generators[0], w, scales, k_max, placements, reps, stream)?;
        statistics
            .iter()
            .map(|s| all.iter().find(|r| r.statistic == *s).cloned().ok_or_else(|| Error::Unsupported(format!("{s} against Poisson"))))
            .collect::<Result<_>>()?
    };
    let mut body = Vec::new();
    let mut verdicts = String::new();
    for r in &reports {
        for c in &r.per_scale {
            body.push(vec![
                r.statistic.to_string(),
                fmt_f64(c.scale),
                fmt_f64(c.estimate),
                fmt_f64(c.reference),
                fmt_f64(c.std_error),
                fmt_f64(c.z_score),
            ]);
        }
        verdicts.push_str(&format!("{}: {}\n", r.statistic, r.verdict));
    }
    out.write("compare.csv", &table(&strings(&["statistic", "scale", "estimate", "reference", "std_error", "z"]), &body))?;
    out.write("verdicts.txt", &verdicts)?;
    out.plot("compare.svg", || {
        let series: Vec<Series> = reports
            .iter()
            .map(|r| {
                let z: Vec<f64> = r.per_scale.iter().map(|c| c.z_score).collect();
                Series::new(r.statistic.to_string(), scales, &z)
            })
            .collect();
        line_chart("standardised differences", "scale", "z", &series, false)
    })
}

fn bound_label(v: BoundVerdict) -> &'static str {
    match v {
        BoundVerdict::Below => "below",
        BoundVerdict::In => "in",
        BoundVerdict::Above => "above",
    }
}

fn run_percolation(out: &mut Outputs, cfg: &ExperimentConfig, w: &Window, reps: usize, stream: &RandomStream) -> Result<()> {
    let Params::Percolation { radii, critical, tol, k, grid_n } = &cfg.params else {
        unreachable!()
    };
    let fams = cfg.generators.len();
    let mut sweep_cols: Vec<Vec<f64>> = Vec::new();
    let mut cross_cols: Vec<Vec<f64>> = Vec::new();
    let mut kcross_cols: Vec<Vec<f64>> = Vec::new();
    let (mut sweep_head, mut cross_head, mut kcross_head) = (strings(&["r"]), strings(&["r"]), strings(&["r"]));
    let mut critical_rows = Vec::new();
    for (j, spec) in cfg.generators.iter().enumerate() {
        let s = suffix(j, fams);
        let sweep = component_fraction_sweep(spec, w, radii, reps, &stream.derive_named("sweep"))?;
        for name in ["largest_fraction", "second_fraction", "stderr_largest", "stderr_second"] {
            sweep_head.push(format!("{name}{s}"));
        }
        sweep_cols.push(values(&sweep.largest_fraction));
        sweep_cols.push(values(&sweep.second_fraction));
        sweep_cols.push(sweep.largest_fraction.iter().map(|e| e.std_error).collect());
        sweep_cols.push(sweep.second_fraction.iter().map(|e| e.std_error).collect());

        let cross = crossing_sweep(spec, w, radii, reps, &stream.derive_named("crossing"))?;
        cross_head.push(format!("crossing_prob{s}"));
        cross_head.push(format!("std_error{s}"));
        cross_cols.push(values(&cross));
        cross_cols.push(cross.iter().map(|e| e.std_error).collect());

        if *k > 0 {
            let kc = k_percolation_sweep(spec, w, radii, *k, *grid_n, reps, &stream.derive_named("k_percolation"))?;
            kcross_head.push(format!("crossing_prob{s}"));
            kcross_head.push(format!("std_error{s}"));
            kcross_cols.push(values(&kc));
            kcross_cols.push(kc.iter().map(|e| e.std_error).collect());
        }
        if *critical {
            let rc = critical_radius(spec, w, reps, *tol, &stream.derive_named("critical"))?;
            let b = check_percolation_bounds(rc.value, spec.window_intensity(w), w.dim())?;
            critical_rows.push(vec![
                (j + 1).to_string(),
                spec.to_string(),
                fmt_f64(rc.value),
                fmt_f64(rc.std_error),
                fmt_f64(b.lower),
                fmt_f64(b.upper),
                bound_label(b.verdict).to_string(),
            ]);
        }
    }
    let by_radius = |cols: &[Vec<f64>]| -> Vec<Vec<String>> {
        radii
            .iter()
            .enumerate()
            .map(|(i, r)| std::iter::once(fmt_f64(*r)).chain(cols.iter().map(|c| fmt_f64(c[i]))).collect())
            .collect()
    };
    out.write("sweep.csv", &table(&sweep_head, &by_radius(&sweep_cols)))?;
    out.write("crossing.csv", &table(&cross_head, &by_radius(&cross_cols)))?;
    if *k > 0 {
        out.write("k_crossing.csv", &table(&kcross_head, &by_radius(&kcross_cols)))?;
    }
    if *critical {
        let head = strings(&["family", "spec", "r_c", "std_error", "lower_bound", "upper_bound", "bounds"]);
        out.write("critical.csv", &table(&head, &critical_rows))?;
    }
    out.plot("sweep.svg", || {
        let mut series = Vec::new();
        for (j, spec) in cfg.generators.iter().enumerate() {
            series.push(Series::new(format!("largest {spec}"), radii, &sweep_cols[4 * j]));
            series.push(Series::new(format!("second {spec}"), radii, &sweep_cols[4 * j + 1]));
        }
        line_chart("component fractions", "r", "fraction", &series, false)
    })?;
    out.plot("crossing.svg", || {
        let series: Vec<Series> = cfg
            .generators
            .iter()
            .enumerate()
            .map(|(j, spec)| Series::new(spec.to_string(), radii, &cross_cols[2 * j]))
            .collect();
        line_chart("crossing probability", "r", "probability", &series, false)
    })
}

#[allow(clippy::too_many_arguments)]
fn run_coverage(
    out: &mut Outputs,
    generators: &[GeneratorSpec],
    w: &Window,
    radii: &[f64],
    ks: &[u32],
    grid_n: usize,
    reps: usize,
    stream: &RandomStream,
) -> Result<()> {
    let mut results = Vec::new();
    for (j, spec) in generators.iter().enumerate() {
        let vols = k_covered_volumes(spec, w, radii, ks, grid_n, reps, stream)?;
        let body: Vec<Vec<String>> = vols
            .iter()
            .map(|(r, k, e)| vec![fmt_f64(*r), k.to_string(), fmt_f64(e.value), fmt_f64(e.std_error)])
            .collect();
        let name = if j == 0 { "coverage.csv".to_string() } else { format!("coverage_{}.csv", j + 1) };
        out.write(&name, &table(&strings(&["r", "k", "volume", "std_error"]), &body))?;
        results.push(vols);
    }
    let per_r = |vols: &[(f64, u32, EstimateWithError)], i: usize| -> Vec<f64> { vols[i * ks.len()..(i + 1) * ks.len()].iter().map(|v| v.2.value).collect() };
    if let [a, b] = &results[..] {
        let mut text = String::from("# first k where the ordering of k-covered volumes flips\n");
        for (i, r) in radii.iter().enumerate() {
            let c = coverage_crossing(ks, &per_r(a, i), &per_r(b, i));
            text.push_str(&format!("r = {}: {}\n", fmt_f64(*r), c.map_or("none".to_string(), |k| k.to_string())));
        }
        out.write("coverage_crossing.txt", &text)?;
    }
    out.plot("coverage.svg", || {
        let kx: Vec<f64> = ks.iter().map(|k| *k as f64).collect();
        let mut series = Vec::new();
        for (j, vols) in results.iter().enumerate() {
            for (i, r) in radii.iter().enumerate() {
                series.push(Series::new(format!("{} r={r}", generators[j]), &kx, &per_r(vols, i)));
            }
        }
        line_chart("k-covered volume", "k", "volume", &series, false)
    })
}

fn run_sinr(out: &mut Outputs, cfg: &ExperimentConfig, w: &Window, reps: usize, stream: &RandomStream) -> Result<()> {
    let Params::Sinr { power, noise, threshold, gammas, attenuation, dump_graph } = &cfg.params else {
        unreachable!()
    };
    let params: Vec<SinrParams> = gammas
        .iter()
        .map(|g| SinrParams {
            power: *power,
            noise: *noise,
            threshold: *threshold,
            gamma: *g,
            attenuation: attenuation.clone(),
        })
        .collect();
    for p in &params {
        p.validate(w.dim())?;
    }
    let graphs_for = |st: &RandomStream| -> Result<Vec<crate::percolation::Graph>> {
        let b = sample(&cfg.generators[0], w, &st.derive(0))?;
        let i = match cfg.generators.get(1) {
            Some(spec) => sample(spec, w, &st.derive(1))?,
            None => b.clone(),
        };
        params.iter().map(|p| sinr_graph(&b, &i, p)).collect()
    };
    let per_rep: Vec<Vec<(f64, f64)>> = try_replicate(reps, stream, |_, st| {
        Ok(graphs_for(&st)?
            .iter()
            .map(|g| {
                let sizes = components(g);
                let largest = if g.n_vertices() == 0 { 0.0 } else { sizes[0] as f64 / g.n_vertices() as f64 };
                (g.n_edges() as f64, largest)
            })
            .collect())
    })?;
    let column = |i: usize, f: fn(&(f64, f64)) -> f64| EstimateWithError::from_samples(&per_rep.iter().map(|row| f(&row[i])).collect::<Vec<_>>());
    let edges: Vec<EstimateWithError> = (0..gammas.len()).map(|i| column(i, |t| t.0)).collect();
    let largest: Vec<EstimateWithError> = (0..gammas.len()).map(|i| column(i, |t| t.1)).collect();
    let body: Vec<Vec<String>> = gammas
        .iter()
        .enumerate()
        .map(|(i, g)| {
            vec![fmt_f64(*g), fmt_f64(edges[i].value), fmt_f64(edges[i].std_error), fmt_f64(largest[i].value), fmt_f64(largest[i].std_error)]
        })
        .collect();
    out.write("sinr.csv", &table(&strings(&["gamma", "edges", "std_error", "largest_fraction", "stderr_largest"]), &body))?;
    if *dump_graph {
        for (i, g) in graphs_for(&stream.derive(0))?.iter().enumerate() {
            out.write(&format!("sinr_edges_{i}.csv"), &g.to_csv())?;
        }
    }
    out.plot("sinr.svg", || line_chart("SINR graph", "gamma", "mean edges", &[Series::new("edges", gammas, &values(&edges))], false))
}

fn run_graph(out: &mut Outputs, cfg: &ExperimentConfig, reps: usize, stream: &RandomStream) -> Result<()> {
    let Params::Graph { n_list, rule, ks, exact_chromatic_limit, motif } = &cfg.params else {
        unreachable!()
    };
    let spec = &cfg.generators[0];
    let rows = scaling_experiment(spec, cfg.dim, *rule, n_list, ks, *exact_chromatic_limit, reps, stream)?;
    let mut head = strings(&[
        "n",
        "radius",
        "points",
        "edges",
        "clique_number",
        "stderr_clique",
        "max_degree",
        "stderr_max_degree",
        "chromatic_number",
        "stderr_chromatic",
        "chromatic_exact_fraction",
    ]);
    for k in ks {
        head.push(format!("p_clique_below_{k}"));
        head.push(format!("stderr_clique_below_{k}"));
    }
    let body: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![
                r.n.to_string(),
                fmt_f64(r.radius),
                fmt_f64(r.points.value),
                fmt_f64(r.edges.value),
                fmt_f64(r.clique_number.value),
                fmt_f64(r.clique_number.std_error),
                fmt_f64(r.max_degree.value),
                fmt_f64(r.max_degree.std_error),
                fmt_f64(r.chromatic_number.value),
                fmt_f64(r.chromatic_number.std_error),
                fmt_f64(r.chromatic_exact),
            ];
            for (_, e) in &r.clique_below {
                v.push(fmt_f64(e.value));
                v.push(fmt_f64(e.std_error));
            }
            v
        })
        .collect();
    out.write("graph.csv", &table(&head, &body))?;
    if let Some(motif) = motif {
        let mut mrows = Vec::new();
        for (i, &n) in n_list.iter().enumerate() {
            let r = rule.radius(n);
            let e = mean_motif_count(spec, &scaling_window(n, cfg.dim)?, r, motif, reps, &stream.derive_named("motif").derive(i as u64))?;
            mrows.push(vec![n.to_string(), fmt_f64(r), motif.name().unwrap_or("motif").to_string(), fmt_f64(e.value), fmt_f64(e.std_error)]);
        }
        out.write("motif.csv", &table(&strings(&["n", "radius", "motif", "mean_count", "std_error"]), &mrows))?;
    }
    out.plot("graph.svg", || {
        let ns: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
        let pick = |f: fn(&crate::graphs::ScalingRow) -> f64| rows.iter().map(f).collect::<Vec<_>>();
        line_chart(
            "geometric graph scaling",
            "n",
            "mean",
            &[
                Series::new("clique number", &ns, &pick(|r| r.clique_number.value)),
                Series::new("max degree", &ns, &pick(|r| r.max_degree.value)),
                Series::new("chromatic number", &ns, &pick(|r| r.chromatic_number.value)),
            ],
            true,
        )
    })
}
