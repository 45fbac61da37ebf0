//! Point-process families and their samplers.
//!
//! A [`GeneratorSpec`] is a declarative description of one family. It is
//! turned into a [`Sampler`] for a given window (which caches anything that
//! depends only on the spec and window, such as the Cholesky factor of a
//! log-Gaussian field) and then sampled once per [`RandomStream`].
//!
//! Hexagonal lattice intensity is `2 / (sqrt(3) * spacing^2)`, the inverse
//! of the rhombic cell area.

mod ginibre;
pub mod io;
mod sampler;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::dists::CountDistribution;
use crate::error::{Error, Result};
use crate::expr::{call, Args, Expr};
use crate::geometry::{PointPattern, Window};
use crate::stream::RandomStream;

pub use ginibre::ginibre_expected_count;
pub use sampler::Sampler;

/// Largest truncation rank accepted for the Ginibre sampler.
pub const MAX_GINIBRE_RANK: usize = 400;
/// Largest number of field cells for the log-Gaussian Cox sampler.
pub const MAX_LGCP_CELLS: usize = 64 * 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LatticeKind {
    Square,
    /// Two-dimensional hexagonal (triangular) lattice.
    Hex,
}

/// How replicas are displaced from their lattice site or parent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Displacement {
    /// Uniform in the lattice cell attached to the site (the cell with the
    /// site as its lower corner).
    UniformInCell,
    Gaussian { sigma: f64 },
    UniformInBall { radius: f64 },
}

/// Law of the random intensity of a mixed Poisson process.
#[derive(Debug, Clone, PartialEq)]
pub enum MixingLaw {
    /// `(weight, intensity)` atoms.
    Discrete(Vec<(f64, f64)>),
    /// `scale * X` with `X` drawn from a count law.
    Scaled { law: CountDistribution, scale: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorSpec {
    HomogeneousPoisson {
        intensity: f64,
    },
    SquareLattice {
        spacing: f64,
        stationary: bool,
    },
    HexLattice {
        spacing: f64,
        stationary: bool,
    },
    BernoulliLattice {
        spacing: f64,
        retention: f64,
    },
    BinomialProcess {
        count: u64,
    },
    PerturbedLattice {
        spacing: f64,
        lattice: LatticeKind,
        replication: CountDistribution,
        displacement: Displacement,
    },
    MaternCluster {
        parent_intensity: f64,
        mean_cluster_size: f64,
        cluster_radius: f64,
    },
    ThomasCluster {
        parent_intensity: f64,
        mean_cluster_size: f64,
        sigma: f64,
    },
    NeymanScott {
        parent_intensity: f64,
        replication: CountDistribution,
        displacement: Displacement,
    },
    MixedPoisson {
        mixing: MixingLaw,
    },
    /// Cox process driven by `exp(eta)` with `eta` Gaussian of mean `field_mean`
    /// and covariance `variance * exp(-|x-y| / correlation_length)`.
    LogGaussianCox {
        field_mean: f64,
        variance: f64,
        correlation_length: f64,
        grid_n: usize,
    },
    /// Ginibre process truncated to its `rank` leading eigenfunctions and
    /// restricted to the disk of `radius` centred in the window.
    GinibreTruncated {
        rank: usize,
        radius: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityReport {
    pub value: f64,
    pub exact: bool,
}

fn positive(name: &'static str, x: f64) -> Result<()> {
    if !(x.is_finite() && x > 0.0) {
        return Err(Error::param(name, format!("{x} must be positive and finite")));
    }
    Ok(())
}

fn non_negative(name: &'static str, x: f64) -> Result<()> {
    if !(x.is_finite() && x >= 0.0) {
        return Err(Error::param(name, format!("{x} must be non-negative and finite")));
    }
    Ok(())
}

impl Displacement {
    fn validate(&self) -> Result<()> {
        match self {
            Displacement::UniformInCell => Ok(()),
            Displacement::Gaussian { sigma } => positive("sigma", *sigma),
            Displacement::UniformInBall { radius } => positive("radius", *radius),
        }
    }

    /// Distance beyond which displacements are (practically) never seen.
    pub(crate) fn reach(&self, cell_diameter: f64) -> f64 {
        match self {
            Displacement::UniformInCell => cell_diameter,
            Displacement::Gaussian { sigma } => 6.0 * sigma,
            Displacement::UniformInBall { radius } => *radius,
        }
    }
}

impl MixingLaw {
    fn validate(&self) -> Result<()> {
        match self {
            MixingLaw::Discrete(atoms) => {
                if atoms.is_empty() {
                    return Err(Error::param("mixing", "need at least one atom"));
                }
                for (w, l) in atoms {
                    non_negative("mixing weight", *w)?;
                    non_negative("mixing intensity", *l)?;
                }
                let total: f64 = atoms.iter().map(|(w, _)| w).sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::param("mixing", format!("weights sum to {total}, not 1")));
                }
                Ok(())
            }
            MixingLaw::Scaled { scale, .. } => non_negative("scale", *scale),
        }
    }

    pub fn mean(&self) -> f64 {
        match self {
            MixingLaw::Discrete(atoms) => atoms.iter().map(|(w, l)| w * l).sum(),
            MixingLaw::Scaled { law, scale } => scale * law.mean(),
        }
    }
}

impl GeneratorSpec {
    pub fn validate(&self) -> Result<()> {
        use GeneratorSpec::*;
        match self {
            HomogeneousPoisson { intensity } => non_negative("intensity", *intensity),
            SquareLattice { spacing, .. } | HexLattice { spacing, .. } => positive("spacing", *spacing),
            BernoulliLattice { spacing, retention } => {
                positive("spacing", *spacing)?;
                if !(0.0..=1.0).contains(retention) {
                    return Err(Error::param("retention", format!("{retention} outside [0, 1]")));
                }
                Ok(())
            }
            BinomialProcess { .. } => Ok(()),
            PerturbedLattice {
                spacing, displacement, ..
            } => {
                positive("spacing", *spacing)?;
                displacement.validate()
            }
            MaternCluster {
                parent_intensity,
                mean_cluster_size,
                cluster_radius,
            } => {
                positive("parent_intensity", *parent_intensity)?;
                positive("mean_cluster_size", *mean_cluster_size)?;
                positive("cluster_radius", *cluster_radius)
            }
            ThomasCluster {
                parent_intensity,
                mean_cluster_size,
                sigma,
            } => {
                positive("parent_intensity", *parent_intensity)?;
                positive("mean_cluster_size", *mean_cluster_size)?;
                positive("sigma", *sigma)
            }
            NeymanScott {
                parent_intensity,
                displacement,
                ..
            } => {
                positive("parent_intensity", *parent_intensity)?;
                if *displacement == Displacement::UniformInCell {
                    return Err(Error::param("displacement", "Neyman-Scott parents have no lattice cell"));
                }
                displacement.validate()
            }
            MixedPoisson { mixing } => mixing.validate(),
            LogGaussianCox {
                field_mean,
                variance,
                correlation_length,
                grid_n,
            } => {
                if !field_mean.is_finite() {
                    return Err(Error::param("field_mean", "must be finite"));
                }
                non_negative("variance", *variance)?;
                positive("correlation_length", *correlation_length)?;
                if *grid_n < 1 {
                    return Err(Error::param("grid_n", "must be at least 1"));
                }
                Ok(())
            }
            GinibreTruncated { rank, radius } => {
                positive("radius", *radius)?;
                if *rank < 1 {
                    return Err(Error::param("rank", "must be at least 1"));
                }
                if *rank > MAX_GINIBRE_RANK {
                    return Err(Error::param("rank", format!("{rank} exceeds the cap of {MAX_GINIBRE_RANK}")));
                }
                if radius * radius > *rank as f64 {
                    return Err(Error::param("radius", format!("radius^2 = {} exceeds rank {rank}", radius * radius)));
                }
                Ok(())
            }
        }
    }

    /// Mean number of points per unit volume in dimension `d`.
    ///
    /// Closed forms everywhere except the binomial process. The Ginibre value
    /// `1/pi` is the density of the untruncated process.
    pub fn intensity_in(&self, d: usize) -> IntensityReport {
        use GeneratorSpec::*;
        let exact = |value| IntensityReport { value, exact: true };
        let cell = |spacing: f64, lattice: LatticeKind| match lattice {
            LatticeKind::Square => spacing.powi(d as i32),
            LatticeKind::Hex => 3f64.sqrt() / 2.0 * spacing * spacing,
        };
        match self {
            HomogeneousPoisson { intensity } => exact(*intensity),
            SquareLattice { spacing, .. } => exact(1.0 / cell(*spacing, LatticeKind::Square)),
            HexLattice { spacing, .. } => exact(1.0 / cell(*spacing, LatticeKind::Hex)),
            BernoulliLattice { spacing, retention } => exact(retention / cell(*spacing, LatticeKind::Square)),
            // a fixed count has no per-volume intensity without a window; the
            // value reported is the intensity on a unit-volume window
            BinomialProcess { count } => IntensityReport {
                value: *count as f64,
                exact: false,
            },
            PerturbedLattice {
                spacing,
                lattice,
                replication,
                ..
            } => exact(replication.mean() / cell(*spacing, *lattice)),
            MaternCluster {
                parent_intensity,
                mean_cluster_size,
                ..
            }
            | ThomasCluster {
                parent_intensity,
                mean_cluster_size,
                ..
            } => exact(parent_intensity * mean_cluster_size),
            NeymanScott {
                parent_intensity,
                replication,
                ..
            } => exact(parent_intensity * replication.mean()),
            MixedPoisson { mixing } => exact(mixing.mean()),
            LogGaussianCox { field_mean, variance, .. } => exact((field_mean + variance / 2.0).exp()),
            GinibreTruncated { .. } => exact(1.0 / PI),
        }
    }

    /// Intensity of the family in its natural dimension (2 for planar
    /// families and for families whose intensity does not depend on `d`).
    pub fn intensity(&self) -> IntensityReport {
        self.intensity_in(2)
    }

    /// Intensity within a window; for the binomial process this is
    /// `count / volume`.
    pub fn window_intensity(&self, w: &Window) -> f64 {
        match self {
            GeneratorSpec::BinomialProcess { count } => *count as f64 / w.volume(),
            GeneratorSpec::GinibreTruncated { rank, radius } => {
                ginibre_expected_count(*rank, *radius) / w.volume()
            }
            _ => self.intensity_in(w.dim()).value,
        }
    }

    pub fn sampler(&self, w: &Window) -> Result<Sampler> {
        Sampler::new(self.clone(), w.clone())
    }

    pub fn to_expr(&self) -> Expr {
        use GeneratorSpec::*;
        let n = Expr::Number;
        let b = |v: bool| Expr::Ident(v.to_string());
        match self {
            HomogeneousPoisson { intensity } => call("poisson", vec![(Some("intensity"), n(*intensity))]),
            SquareLattice { spacing, stationary } => {
                call("square_lattice", vec![(Some("spacing"), n(*spacing)), (Some("stationary"), b(*stationary))])
            }
            HexLattice { spacing, stationary } => {
                call("hex_lattice", vec![(Some("spacing"), n(*spacing)), (Some("stationary"), b(*stationary))])
            }
            BernoulliLattice { spacing, retention } => {
                call("bernoulli_lattice", vec![(Some("spacing"), n(*spacing)), (Some("retention"), n(*retention))])
            }
            BinomialProcess { count } => call("binomial_process", vec![(Some("count"), n(*count as f64))]),
            PerturbedLattice {
                spacing,
                lattice,
                replication,
                displacement,
            } => call(
                "perturbed_lattice",
                vec![
                    (Some("spacing"), n(*spacing)),
                    (Some("replication"), replication.to_expr()),
                    (Some("displacement"), displacement_expr(displacement)),
                    (
                        Some("lattice"),
                        Expr::Ident(
                            match lattice {
                                LatticeKind::Square => "square",
                                LatticeKind::Hex => "hex",
                            }
                            .into(),
                        ),
                    ),
                ],
            ),
            MaternCluster {
                parent_intensity,
                mean_cluster_size,
                cluster_radius,
            } => call(
                "matern",
                vec![
                    (Some("parent_intensity"), n(*parent_intensity)),
                    (Some("mean_size"), n(*mean_cluster_size)),
                    (Some("radius"), n(*cluster_radius)),
                ],
            ),
            ThomasCluster {
                parent_intensity,
                mean_cluster_size,
                sigma,
            } => call(
                "thomas",
                vec![
                    (Some("parent_intensity"), n(*parent_intensity)),
                    (Some("mean_size"), n(*mean_cluster_size)),
                    (Some("sigma"), n(*sigma)),
                ],
            ),
            NeymanScott {
                parent_intensity,
                replication,
                displacement,
            } => call(
                "neyman_scott",
                vec![
                    (Some("parent_intensity"), n(*parent_intensity)),
                    (Some("replication"), replication.to_expr()),
                    (Some("displacement"), displacement_expr(displacement)),
                ],
            ),
            MixedPoisson { mixing } => {
                let m = match mixing {
                    MixingLaw::Discrete(atoms) => call(
                        "discrete",
                        atoms.iter().map(|(w, l)| (None, Expr::List(vec![n(*w), n(*l)]))).collect(),
                    ),
                    MixingLaw::Scaled { law, scale } => {
                        call("scaled", vec![(Some("law"), law.to_expr()), (Some("scale"), n(*scale))])
                    }
                };
                call("mixed_poisson", vec![(Some("mixing"), m)])
            }
            LogGaussianCox {
                field_mean,
                variance,
                correlation_length,
                grid_n,
            } => call(
                "lgcp",
                vec![
                    (Some("mean"), n(*field_mean)),
                    (Some("variance"), n(*variance)),
                    (Some("scale"), n(*correlation_length)),
                    (Some("grid_n"), n(*grid_n as f64)),
                ],
            ),
            GinibreTruncated { rank, radius } => {
                call("ginibre", vec![(Some("rank"), n(*rank as f64)), (Some("radius"), n(*radius))])
            }
        }
    }

    pub fn from_expr(e: &Expr) -> Result<Self> {
        let (name, raw) = e.as_call()?;
        let mut a = Args::new(name, raw);
        let spec = match name {
            "poisson" => GeneratorSpec::HomogeneousPoisson {
                intensity: a.require("intensity", 0)?.as_f64()?,
            },
            "square_lattice" | "hex_lattice" => {
                let spacing = a.require("spacing", 0)?.as_f64()?;
                let stationary = a.get("stationary", 1).map(Expr::as_bool).transpose()?.unwrap_or(true);
                if name == "hex_lattice" {
                    GeneratorSpec::HexLattice { spacing, stationary }
                } else {
                    GeneratorSpec::SquareLattice { spacing, stationary }
                }
            }
            "bernoulli_lattice" => GeneratorSpec::BernoulliLattice {
                spacing: a.require("spacing", 0)?.as_f64()?,
                retention: a.require("retention", 1)?.as_f64()?,
            },
            "binomial_process" => GeneratorSpec::BinomialProcess {
                count: a.require("count", 0)?.as_u64()?,
            },
            "perturbed_lattice" => GeneratorSpec::PerturbedLattice {
                spacing: a.require("spacing", 0)?.as_f64()?,
                replication: CountDistribution::from_expr(a.require("replication", 1)?)?,
                displacement: a
                    .get("displacement", 2)
                    .map(parse_displacement)
                    .transpose()?
                    .unwrap_or(Displacement::UniformInCell),
                lattice: match a.get("lattice", 3).map(Expr::as_ident).transpose()? {
                    None | Some("square") => LatticeKind::Square,
                    Some("hex") => LatticeKind::Hex,
                    Some(other) => return Err(Error::Parse(format!("unknown lattice `{other}`"))),
                },
            },
            "matern" => GeneratorSpec::MaternCluster {
                parent_intensity: a.require("parent_intensity", 0)?.as_f64()?,
                mean_cluster_size: a.require("mean_size", 1)?.as_f64()?,
                cluster_radius: a.require("radius", 2)?.as_f64()?,
            },
            "thomas" => GeneratorSpec::ThomasCluster {
                parent_intensity: a.require("parent_intensity", 0)?.as_f64()?,
                mean_cluster_size: a.require("mean_size", 1)?.as_f64()?,
                sigma: a.require("sigma", 2)?.as_f64()?,
            },
            "neyman_scott" => GeneratorSpec::NeymanScott {
                parent_intensity: a.require("parent_intensity", 0)?.as_f64()?,
                replication: CountDistribution::from_expr(a.require("replication", 1)?)?,
                displacement: parse_displacement(a.require("displacement", 2)?)?,
            },
            "mixed_poisson" => GeneratorSpec::MixedPoisson {
                mixing: parse_mixing(a.require("mixing", 0)?)?,
            },
            "lgcp" => GeneratorSpec::LogGaussianCox {
                field_mean: a.require("mean", 0)?.as_f64()?,
                variance: a.require("variance", 1)?.as_f64()?,
                correlation_length: a.require("scale", 2)?.as_f64()?,
                grid_n: a.get("grid_n", 3).map(Expr::as_u64).transpose()?.unwrap_or(32) as usize,
            },
            "ginibre" => GeneratorSpec::GinibreTruncated {
                rank: a.require("rank", 0)?.as_u64()? as usize,
                radius: a.require("radius", 1)?.as_f64()?,
            },
            other => return Err(Error::Parse(format!("unknown generator family `{other}`"))),
        };
        a.finish()?;
        spec.validate()?;
        Ok(spec)
    }
}

fn displacement_expr(d: &Displacement) -> Expr {
    match d {
        Displacement::UniformInCell => Expr::Ident("uniform_in_cell".into()),
        Displacement::Gaussian { sigma } => call("gaussian", vec![(None, Expr::Number(*sigma))]),
        Displacement::UniformInBall { radius } => call("uniform_in_ball", vec![(None, Expr::Number(*radius))]),
    }
}

fn parse_displacement(e: &Expr) -> Result<Displacement> {
    let (name, raw) = e.as_call()?;
    let mut a = Args::new(name, raw);
    let d = match name {
        "uniform_in_cell" => Displacement::UniformInCell,
        "gaussian" => Displacement::Gaussian {
            sigma: a.require("sigma", 0)?.as_f64()?,
        },
        "uniform_in_ball" => Displacement::UniformInBall {
            radius: a.require("radius", 0)?.as_f64()?,
        },
        other => return Err(Error::Parse(format!("unknown displacement `{other}`"))),
    };
    a.finish()?;
    Ok(d)
}

fn parse_mixing(e: &Expr) -> Result<MixingLaw> {
    let (name, raw) = e.as_call()?;
    match name {
        "discrete" => raw
            .iter()
            .map(|arg| match arg.value.as_list()? {
                [w, l] => Ok((w.as_f64()?, l.as_f64()?)),
                _ => Err(Error::Parse("discrete mixing atoms are `[weight, intensity]` pairs".into())),
            })
            .collect::<Result<Vec<_>>>()
            .map(MixingLaw::Discrete),
        "scaled" => {
            let mut a = Args::new(name, raw);
            let law = CountDistribution::from_expr(a.require("law", 0)?)?;
            let scale = a.require("scale", 1)?.as_f64()?;
            a.finish()?;
            Ok(MixingLaw::Scaled { law, scale })
        }
        other => Err(Error::Parse(format!("unknown mixing law `{other}`"))),
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_expr(&Expr::parse(s)?)
    }
}

/// Samples one realisation of `spec` in `w`.
pub fn sample(spec: &GeneratorSpec, w: &Window, stream: &RandomStream) -> Result<PointPattern> {
    Ok(spec.sampler(w)?.sample(stream))
}

/// Closed-form intensity of `spec` (in the plane for dimension-dependent lattices).
pub fn intensity(spec: &GeneratorSpec) -> IntensityReport {
    spec.intensity()
}
