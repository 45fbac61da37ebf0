use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::ginibre::GinibrePrep;
use super::{Displacement, GeneratorSpec, LatticeKind, MixingLaw, MAX_LGCP_CELLS};
use crate::dists::sample_poisson;
use crate::error::{Error, Result};
use crate::geometry::{CellGridSpec, Metric, PointPattern, Window};
use crate::stream::{RandomStream, StreamRng};

/// A generator bound to a window, with window-dependent precomputation done.
#[derive(Debug, Clone)]
pub struct Sampler {
    spec: GeneratorSpec,
    window: Window,
    prep: Prep,
}

#[derive(Debug, Clone)]
enum Prep {
    None,
    Lgcp { grid: CellGridSpec, factor: Option<DMatrix<f64>> },
    Ginibre(GinibrePrep),
}

impl Sampler {
    pub(crate) fn new(spec: GeneratorSpec, window: Window) -> Result<Self> {
        spec.validate()?;
        let planar = matches!(
            spec,
            GeneratorSpec::HexLattice { .. }
                | GeneratorSpec::GinibreTruncated { .. }
                | GeneratorSpec::PerturbedLattice {
                    lattice: LatticeKind::Hex,
                    ..
                }
        );
        if planar && window.dim() != 2 {
            return Err(Error::DimensionMismatch {
                expected: 2,
                got: window.dim(),
            });
        }
        let prep = match &spec {
            GeneratorSpec::LogGaussianCox {
                variance,
                correlation_length,
                grid_n,
                ..
            } => {
                let grid = CellGridSpec::new(&window, *grid_n, MAX_LGCP_CELLS as u128)?;
                let factor = (*variance > 0.0).then(|| lgcp_factor(&grid, *variance, *correlation_length)).transpose()?;
                Prep::Lgcp { grid, factor }
            }
            GeneratorSpec::GinibreTruncated { rank, radius } => Prep::Ginibre(GinibrePrep::new(*rank, *radius, &window)?),
            _ => Prep::None,
        };
        Ok(Self { spec, window, prep })
    }

    pub fn spec(&self) -> &GeneratorSpec {
        &self.spec
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    /// One realisation, with points in lexicographic order.
    pub fn sample(&self, stream: &RandomStream) -> PointPattern {
        let mut rng = stream.rng();
        let coords = self.draw(&mut rng);
        let mut p = PointPattern::from_coords_unchecked(self.window.clone(), coords);
        p.sort_lexicographic();
        p
    }

    fn draw(&self, rng: &mut StreamRng) -> Vec<f64> {
        let w = &self.window;
        let d = w.dim();
        let mut out = Vec::new();
        match &self.spec {
            GeneratorSpec::HomogeneousPoisson { intensity } => {
                let n = sample_poisson(intensity * w.volume(), rng);
                uniform_points(w, n, rng, &mut out);
            }
            GeneratorSpec::BinomialProcess { count } => uniform_points(w, *count, rng, &mut out),
            GeneratorSpec::MixedPoisson { mixing } => {
                let lambda = match mixing {
                    MixingLaw::Discrete(atoms) => {
                        let u: f64 = rng.random();
                        let mut acc = 0.0;
                        let mut pick = atoms[atoms.len() - 1].1;
                        for (wt, l) in atoms {
                            acc += wt;
                            if u < acc {
                                pick = *l;
                                break;
                            }
                        }
                        pick
                    }
                    MixingLaw::Scaled { law, scale } => scale * law.sample_with(rng) as f64,
                };
                let n = sample_poisson(lambda * w.volume(), rng);
                uniform_points(w, n, rng, &mut out);
            }
            GeneratorSpec::SquareLattice { spacing, stationary } | GeneratorSpec::HexLattice { spacing, stationary } => {
                let kind = if matches!(self.spec, GeneratorSpec::HexLattice { .. }) {
                    LatticeKind::Hex
                } else {
                    LatticeKind::Square
                };
                let lat = Lattice::new(kind, *spacing, d);
                let shift = if *stationary { lat.random_shift(rng) } else { vec![0.0; d] };
                lat.sites(&shift, w.lower(), w.upper(), |s| out.extend_from_slice(s));
            }
            GeneratorSpec::BernoulliLattice { spacing, retention } => {
                let lat = Lattice::new(LatticeKind::Square, *spacing, d);
                let shift = lat.random_shift(rng);
                let mut sites = Vec::new();
                lat.sites(&shift, w.lower(), w.upper(), |s| sites.extend_from_slice(s));
                for s in sites.chunks_exact(d) {
                    let u: f64 = rng.random();
                    if u < *retention {
                        out.extend_from_slice(s);
                    }
                }
            }
            GeneratorSpec::PerturbedLattice {
                spacing,
                lattice,
                replication,
                displacement,
            } => {
                let lat = Lattice::new(*lattice, *spacing, d);
                let origin = vec![0.0; d];
                let mut sites = Vec::new();
                match w.metric() {
                    Metric::Periodic => lat.sites(&origin, w.lower(), w.upper(), |s| sites.extend_from_slice(s)),
                    Metric::Euclidean => {
                        let halo = displacement.reach(lat.cell_diameter());
                        let lo: Vec<f64> = w.lower().iter().map(|x| x - halo).collect();
                        let hi: Vec<f64> = w.upper().iter().map(|x| x + halo).collect();
                        lat.sites(&origin, &lo, &hi, |s| sites.extend_from_slice(s));
                    }
                }
                let mut x = vec![0.0; d];
                for site in sites.chunks_exact(d) {
                    let k = replication.sample_with(rng);
                    for _ in 0..k {
                        match displacement {
                            Displacement::UniformInCell => lat.uniform_in_cell(site, rng, &mut x),
                            _ => {
                                x.copy_from_slice(site);
                                displace(displacement, rng, &mut x);
                            }
                        }
                        keep(w, &mut x, &mut out);
                    }
                }
            }
            GeneratorSpec::MaternCluster {
                parent_intensity,
                mean_cluster_size,
                cluster_radius,
            } => {
                let disp = Displacement::UniformInBall { radius: *cluster_radius };
                cluster(w, *parent_intensity, *cluster_radius, rng, &mut out, |rng| {
                    (sample_poisson(*mean_cluster_size, rng), disp)
                });
            }
            GeneratorSpec::ThomasCluster {
                parent_intensity,
                mean_cluster_size,
                sigma,
            } => {
                let disp = Displacement::Gaussian { sigma: *sigma };
                cluster(w, *parent_intensity, 6.0 * sigma, rng, &mut out, |rng| {
                    (sample_poisson(*mean_cluster_size, rng), disp)
                });
            }
            GeneratorSpec::NeymanScott {
                parent_intensity,
                replication,
                displacement,
            } => {
                cluster(w, *parent_intensity, displacement.reach(0.0), rng, &mut out, |rng| {
                    (replication.sample_with(rng), *displacement)
                });
            }
            GeneratorSpec::LogGaussianCox { field_mean, .. } => {
                let Prep::Lgcp { grid, factor } = &self.prep else {
                    unreachable!("log-Gaussian sampler built without its grid")
                };
                let n = grid.len();
                let eta: Vec<f64> = match factor {
                    Some(l) => {
                        let z = DVector::from_iterator(n, (0..n).map(|_| StandardNormal.sample(rng)));
                        (l * z).iter().map(|v| v + field_mean).collect()
                    }
                    None => vec![*field_mean; n],
                };
                let vol = grid.cell_volume();
                for (cell, e) in eta.iter().enumerate() {
                    let k = sample_poisson(e.exp() * vol, rng);
                    if k == 0 {
                        continue;
                    }
                    let c = grid.center(cell);
                    let mut x = vec![0.0; d];
                    for _ in 0..k {
                        for axis in 0..d {
                            let u: f64 = rng.random();
                            let h = grid.cell_side(axis);
                            x[axis] = c[axis] + (u - 0.5) * h;
                        }
                        keep(w, &mut x, &mut out);
                    }
                }
            }
            GeneratorSpec::GinibreTruncated { .. } => {
                let Prep::Ginibre(g) = &self.prep else {
                    unreachable!("Ginibre sampler built without its eigenvalues")
                };
                g.draw(rng, &mut out);
            }
        }
        out
    }
}

fn uniform_points(w: &Window, n: u64, rng: &mut StreamRng, out: &mut Vec<f64>) {
    let d = w.dim();
    let mut x = vec![0.0; d];
    out.reserve(n as usize * d);
    for _ in 0..n {
        w.uniform_point(rng, &mut x);
        out.extend_from_slice(&x);
    }
}

/// Wraps (periodic) or clips (Euclidean) a candidate point.
fn keep(w: &Window, x: &mut [f64], out: &mut Vec<f64>) {
    if w.is_periodic() {
        w.wrap(x);
        out.extend_from_slice(x);
    } else if w.contains(x) {
        out.extend_from_slice(x);
    }
}

fn displace(disp: &Displacement, rng: &mut StreamRng, x: &mut [f64]) {
    match disp {
        Displacement::UniformInCell => unreachable!("cell displacement needs a lattice"),
        Displacement::Gaussian { sigma } => {
            for v in x.iter_mut() {
                let z: f64 = StandardNormal.sample(rng);
                *v += sigma * z;
            }
        }
        Displacement::UniformInBall { radius } => {
            let d = x.len();
            let mut dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            let u: f64 = rng.random();
            let r = radius * u.powf(1.0 / d as f64);
            for (v, g) in x.iter_mut().zip(dir.iter_mut()) {
                *v += r * *g / norm;
            }
        }
    }
}

/// Poisson parents (on the torus, or on the window dilated by `halo`), each
/// with an independently drawn offspring count and displacement law.
fn cluster<F>(w: &Window, parent_intensity: f64, halo: f64, rng: &mut StreamRng, out: &mut Vec<f64>, offspring: F)
where
    F: Fn(&mut StreamRng) -> (u64, Displacement),
{
    let d = w.dim();
    let halo = if w.is_periodic() { 0.0 } else { halo };
    let lo: Vec<f64> = w.lower().iter().map(|x| x - halo).collect();
    let sides: Vec<f64> = w.sides().iter().map(|s| s + 2.0 * halo).collect();
    let vol: f64 = sides.iter().product();
    let parents = sample_poisson(parent_intensity * vol, rng);
    let mut parent = vec![0.0; d];
    let mut x = vec![0.0; d];
    for _ in 0..parents {
        for axis in 0..d {
            let u: f64 = rng.random();
            parent[axis] = lo[axis] + u * sides[axis];
        }
        let (k, disp) = offspring(rng);
        for _ in 0..k {
            x.copy_from_slice(&parent);
            displace(&disp, rng, &mut x);
            keep(w, &mut x, out);
        }
    }
}

fn lgcp_factor(grid: &CellGridSpec, variance: f64, ell: f64) -> Result<DMatrix<f64>> {
    let n = grid.len();
    let centers: Vec<Vec<f64>> = (0..n).map(|i| grid.center(i)).collect();
    let cov = DMatrix::from_fn(n, n, |i, j| {
        let r = centers[i].iter().zip(&centers[j]).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        variance * (-r / ell).exp()
    });
    // the exponential kernel is positive definite; jitter only guards rounding
    let mut jitter = 0.0;
    for _ in 0..6 {
        let mut m = cov.clone();
        for i in 0..n {
            m[(i, i)] += jitter;
        }
        if let Some(ch) = m.cholesky() {
            return Ok(ch.unpack());
        }
        jitter = if jitter == 0.0 { 1e-12 * variance } else { jitter * 100.0 };
    }
    Err(Error::NonIntegrable("field covariance is not numerically positive definite".into()))
}

/// A square or hexagonal lattice with spacing `spacing`.
pub(crate) struct Lattice {
    kind: LatticeKind,
    spacing: f64,
    dim: usize,
}

impl Lattice {
    pub(crate) fn new(kind: LatticeKind, spacing: f64, dim: usize) -> Self {
        Self { kind, spacing, dim }
    }

    fn row_height(&self) -> f64 {
        self.spacing * 3f64.sqrt() / 2.0
    }

    pub(crate) fn cell_diameter(&self) -> f64 {
        match self.kind {
            LatticeKind::Square => self.spacing * (self.dim as f64).sqrt(),
            LatticeKind::Hex => self.spacing * 3f64.sqrt(),
        }
    }

    /// `s * a1 + t * a2 (+ ...)` for uniform coefficients; a uniform point of
    /// the fundamental cell.
    pub(crate) fn random_shift<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut x = vec![0.0; self.dim];
        self.uniform_in_cell(&vec![0.0; self.dim], rng, &mut x);
        x
    }

    pub(crate) fn uniform_in_cell<R: Rng + ?Sized>(&self, site: &[f64], rng: &mut R, out: &mut [f64]) {
        match self.kind {
            LatticeKind::Square => {
                for (o, s) in out.iter_mut().zip(site) {
                    let u: f64 = rng.random();
                    *o = s + u * self.spacing;
                }
            }
            LatticeKind::Hex => {
                let s: f64 = rng.random();
                let t: f64 = rng.random();
                out[0] = site[0] + (s + 0.5 * t) * self.spacing;
                out[1] = site[1] + t * self.row_height();
            }
        }
    }

    /// Calls `visit` for every site `shift + lattice` inside `[lo, hi)`.
    pub(crate) fn sites(&self, shift: &[f64], lo: &[f64], hi: &[f64], mut visit: impl FnMut(&[f64])) {
        let range = |lo: f64, hi: f64, origin: f64, step: f64| {
            let a = ((lo - origin) / step).floor() as i64 - 1;
            let b = ((hi - origin) / step).ceil() as i64 + 1;
            a..=b
        };
        match self.kind {
            LatticeKind::Hex => {
                let h = self.row_height();
                let mut x = [0.0; 2];
                for j in range(lo[1], hi[1], shift[1], h) {
                    x[1] = shift[1] + j as f64 * h;
                    if x[1] < lo[1] || x[1] >= hi[1] {
                        continue;
                    }
                    let x0 = shift[0] + j as f64 * self.spacing / 2.0;
                    for i in range(lo[0], hi[0], x0, self.spacing) {
                        x[0] = x0 + i as f64 * self.spacing;
                        if x[0] >= lo[0] && x[0] < hi[0] {
                            visit(&x);
                        }
                    }
                }
            }
            LatticeKind::Square => {
                let axes: Vec<Vec<f64>> = (0..self.dim)
                    .map(|a| {
                        range(lo[a], hi[a], shift[a], self.spacing)
                            .map(|i| shift[a] + i as f64 * self.spacing)
                            .filter(|x| *x >= lo[a] && *x < hi[a])
                            .collect()
                    })
                    .collect();
                if axes.iter().any(Vec::is_empty) {
                    return;
                }
                let mut idx = vec![0usize; self.dim];
                let mut x = vec![0.0; self.dim];
                loop {
                    for a in 0..self.dim {
                        x[a] = axes[a][idx[a]];
                    }
                    visit(&x);
                    let mut a = 0;
                    loop {
                        idx[a] += 1;
                        if idx[a] < axes[a].len() {
                            break;
                        }
                        idx[a] = 0;
                        a += 1;
                        if a == self.dim {
                            return;
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::sample;
    use super::*;
    use crate::stats::{replicate, EstimateWithError};

    fn unit_box(side: f64, metric: Metric) -> Window {
        Window::cube(2, side, metric).unwrap()
    }

    fn spec(s: &str) -> GeneratorSpec {
        s.parse().unwrap()
    }

    #[test]
    fn one_point_per_cell() {
        for metric in [Metric::Euclidean, Metric::Periodic] {
            let w = unit_box(10.0, metric);
            let s = spec("perturbed_lattice(spacing=1, replication=binomial(1, 1), displacement=uniform_in_cell)");
            let p = sample(&s, &w, &RandomStream::new(3)).unwrap();
            assert_eq!(p.len(), 100);
            let mut cells: Vec<(i64, i64)> = p.points().map(|x| (x[0].floor() as i64, x[1].floor() as i64)).collect();
            cells.sort();
            cells.dedup();
            assert_eq!(cells.len(), 100);
        }
    }

    #[test]
    fn empty_replication_gives_empty_pattern() {
        let w = unit_box(5.0, Metric::Euclidean);
        let s = spec("perturbed_lattice(spacing=1, replication=deterministic(0), displacement=gaussian(0.3))");
        for i in 0..20 {
            assert!(sample(&s, &w, &RandomStream::new(i)).unwrap().is_empty());
        }
    }

    #[test]
    fn bernoulli_with_full_retention_is_the_lattice() {
        let w = unit_box(7.3, Metric::Euclidean);
        let b = spec("bernoulli_lattice(spacing=0.7, retention=1)");
        let l = spec("square_lattice(spacing=0.7, stationary=true)");
        for i in 0..10 {
            let st = RandomStream::new(i);
            assert_eq!(sample(&b, &w, &st).unwrap(), sample(&l, &w, &st).unwrap());
        }
    }

    #[test]
    fn deterministic_per_stream_and_sorted() {
        let w = unit_box(4.0, Metric::Periodic);
        let s = spec("thomas(parent_intensity=1, mean_size=4, sigma=0.2)");
        let a = sample(&s, &w, &RandomStream::new(11)).unwrap();
        let b = sample(&s, &w, &RandomStream::new(11)).unwrap();
        assert_eq!(a, b);
        let pts: Vec<&[f64]> = a.points().collect();
        assert!(pts.windows(2).all(|p| p[0] <= p[1]));
    }

    #[test]
    fn lattice_site_counts() {
        let w = unit_box(10.0, Metric::Euclidean);
        let p = sample(&spec("square_lattice(spacing=0.5, stationary=false)"), &w, &RandomStream::new(0)).unwrap();
        assert_eq!(p.len(), 400);
        let p = sample(&spec("square_lattice(spacing=0.5, stationary=true)"), &w, &RandomStream::new(0)).unwrap();
        assert_eq!(p.len(), 400);
        // 10 / (sqrt(3)/2) rows of 10 sites
        let p = sample(&spec("hex_lattice(spacing=1, stationary=false)"), &w, &RandomStream::new(0)).unwrap();
        assert_eq!(p.len(), 12 * 10);
    }

    #[test]
    fn hex_lattice_nearest_neighbours() {
        let w = unit_box(10.0, Metric::Euclidean);
        let p = sample(&spec("hex_lattice(spacing=1, stationary=true)"), &w, &RandomStream::new(5)).unwrap();
        let mut min = f64::INFINITY;
        for i in 0..p.len() {
            for j in 0..i {
                min = min.min(w.dist(p.point(i), p.point(j)));
            }
        }
        assert!((min - 1.0).abs() < 1e-9);
    }

    #[test]
    fn planar_families_reject_other_dimensions() {
        let w = Window::cube(3, 2.0, Metric::Euclidean).unwrap();
        assert!(spec("hex_lattice(spacing=1)").sampler(&w).is_err());
        assert!(spec("ginibre(rank=10, radius=1)").sampler(&w).is_err());
    }

    #[test]
    fn lgcp_grid_cap() {
        let w = unit_box(1.0, Metric::Euclidean);
        assert!(matches!(
            spec("lgcp(mean=0, variance=1, scale=1, grid_n=65)").sampler(&w),
            Err(Error::GridTooLarge { .. })
        ));
    }

    fn mean_count(s: &GeneratorSpec, w: &Window, reps: usize) -> EstimateWithError {
        let smp = s.sampler(w).unwrap();
        let counts = replicate(reps, &RandomStream::new(2024), |_, st| smp.sample(&st).len() as f64);
        EstimateWithError::from_samples(&counts)
    }

    #[test]
    fn poisson_mean_count() {
        let w = unit_box(10.0, Metric::Euclidean);
        let e = mean_count(&spec("poisson(intensity=2)"), &w, 2000);
        assert!(e.within(200.0, 4.0), "{e:?}");
        assert!((e.std_error - (200.0f64 / 2000.0).sqrt()).abs() < 0.05);
    }

    #[test]
    fn every_family_has_the_right_mean_count() {
        let families = [
            "poisson(intensity=1.5)",
            "square_lattice(spacing=0.7)",
            "hex_lattice(spacing=0.8)",
            "bernoulli_lattice(spacing=0.5, retention=0.3)",
            "perturbed_lattice(spacing=1, replication=poisson(2), displacement=gaussian(0.4))",
            "perturbed_lattice(spacing=0.9, replication=binomial(3, 0.5), displacement=uniform_in_ball(0.5), lattice=hex)",
            "perturbed_lattice(spacing=1, replication=geometric(0.5), displacement=uniform_in_cell, lattice=hex)",
            "matern(parent_intensity=0.5, mean_size=3, radius=0.5)",
            "thomas(parent_intensity=0.5, mean_size=3, sigma=0.3)",
            "neyman_scott(parent_intensity=0.5, replication=negbinomial(2, 0.5), displacement=gaussian(0.3))",
            "mixed_poisson(mixing=discrete([0.5, 0.5], [0.5, 1.5]))",
            "mixed_poisson(mixing=scaled(law=poisson(2), scale=0.5))",
            "lgcp(mean=-0.5, variance=1, scale=0.5, grid_n=12)",
        ];
        for metric in [Metric::Euclidean, Metric::Periodic] {
            let w = unit_box(6.0, metric);
            for f in families {
                let s = spec(f);
                // the unshifted lattice on an incommensurate torus has a seam, so
                // the expected count is the number of sites times the mean replication
                let target = match &s {
                    GeneratorSpec::PerturbedLattice {
                        spacing,
                        lattice,
                        replication,
                        ..
                    } if metric == Metric::Periodic => {
                        let mut sites = 0;
                        Lattice::new(*lattice, *spacing, 2).sites(&[0.0, 0.0], w.lower(), w.upper(), |_| sites += 1);
                        sites as f64 * replication.mean()
                    }
                    _ => s.window_intensity(&w) * w.volume(),
                };
                let e = mean_count(&s, &w, 500);
                // deterministic lattices have zero variance; allow rounding at the border
                let ok = if e.std_error < 1e-9 {
                    (e.value - target).abs() <= 6.0 * 6.0 / 0.7
                } else {
                    e.within(target, 4.0)
                };
                assert!(ok, "{f} {metric}: {e:?} vs {target}");
            }
        }
    }

    #[test]
    fn binomial_process_exact_count() {
        let w = unit_box(3.0, Metric::Euclidean);
        let p = sample(&spec("binomial_process(count=17)"), &w, &RandomStream::new(1)).unwrap();
        assert_eq!(p.len(), 17);
        assert!(p.points().all(|x| w.contains(x)));
    }
}
