//! Experiment configuration: JSON file values overridden by flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use ctqw_core::dynamics::TimeGrid;
use ctqw_core::graph::GraphFamily;

pub const DEFAULT_STEP: f64 = 0.05;
pub const DEFAULT_T_MAX: f64 = 50.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum FamilyName {
    Dsg,
    Ct,
    Torus,
    Ring,
    Chain,
    Complete,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ObservableName {
    AvgDisplacementSite,
    AvgDisplacementMean,
    AvgEuclideanDisplacementMean,
    ReturnProbClassical,
    ReturnProbQuantum,
    ReturnProbLowerBound,
    RatioClassicalOverQuantum,
    LongTimeAverages,
    ChiBarLbClosedForm,
    CrossingTime,
    EnvelopeExponent,
}

impl ObservableName {
    pub const ALL: [ObservableName; 11] = [
        ObservableName::AvgDisplacementSite,
        ObservableName::AvgDisplacementMean,
        ObservableName::AvgEuclideanDisplacementMean,
        ObservableName::ReturnProbClassical,
        ObservableName::ReturnProbQuantum,
        ObservableName::ReturnProbLowerBound,
        ObservableName::RatioClassicalOverQuantum,
        ObservableName::LongTimeAverages,
        ObservableName::ChiBarLbClosedForm,
        ObservableName::CrossingTime,
        ObservableName::EnvelopeExponent,
    ];
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub t_max: f64,
    pub step: f64,
    pub gamma: f64,
}

impl GridConfig {
    pub fn time_grid(&self) -> anyhow::Result<TimeGrid> {
        Ok(TimeGrid::uniform(self.t_max, self.step, self.gamma)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub format: Format,
}

/// Fully resolved configuration of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub graph: GraphFamily,
    pub grid: GridConfig,
    pub observables: Vec<ObservableName>,
    pub output: OutputConfig,
    pub start: Option<usize>,
    pub sinks: Vec<usize>,
    pub snapshots: Vec<f64>,
    pub exact: bool,
}

impl ExperimentConfig {
    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        self.graph.validate()?;
        let g = &self.grid;
        if !(g.t_max > 0.0 && g.t_max.is_finite()) {
            bail!("t_max must be positive, got {}", g.t_max);
        }
        if !(g.step > 0.0) || g.step > g.t_max {
            bail!("step must satisfy 0 < step <= t_max, got {}", g.step);
        }
        if !(g.gamma > 0.0 && g.gamma.is_finite()) {
            bail!("gamma must be positive, got {}", g.gamma);
        }
        let n = self.graph.expected_size()?;
        if let Some(j) = self.start.filter(|&j| j >= n) {
            bail!("start node {j} out of range for N = {n}");
        }
        if let Some(k) = self.sinks.iter().find(|&&k| k >= n) {
            bail!("sink node {k} out of range for N = {n}");
        }
        if let Some(t) = self.snapshots.iter().find(|&&t| !(t >= 0.0 && t.is_finite())) {
            bail!("snapshot time must be >= 0, got {t}");
        }
        Ok(())
    }
}

/// Partial configuration read from a JSON file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    graph: Option<GraphFamily>,
    grid: Option<PartialGrid>,
    observables: Option<Vec<ObservableName>>,
    output: Option<PartialOutput>,
    start: Option<usize>,
    sinks: Option<Vec<usize>>,
    snapshots: Option<Vec<f64>>,
    exact: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialGrid {
    t_max: Option<f64>,
    step: Option<f64>,
    gamma: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialOutput {
    directory: Option<PathBuf>,
    format: Option<Format>,
}

#[derive(Args, Debug, Default, Clone)]
pub struct GraphArgs {
    /// Graph family.
    #[arg(long, value_enum)]
    pub family: Option<FamilyName>,
    /// DSG generation.
    #[arg(long)]
    pub g: Option<u32>,
    /// Cayley-tree coordination number.
    #[arg(long)]
    pub z: Option<usize>,
    /// Cayley-tree shells around the root.
    #[arg(long)]
    pub shells: Option<u32>,
    /// Torus dimension.
    #[arg(long)]
    pub d: Option<u32>,
    /// Torus side length.
    #[arg(long = "L")]
    pub side: Option<usize>,
    /// Node count of rings, chains and complete graphs.
    #[arg(long = "N")]
    pub n: Option<usize>,
}

impl GraphArgs {
    fn any_parameter(&self) -> bool {
        self.g.is_some() || self.z.is_some() || self.shells.is_some() || self.d.is_some() || self.side.is_some() || self.n.is_some()
    }

    fn from_flags(&self, family: FamilyName) -> anyhow::Result<GraphFamily> {
        let need = |v: Option<_>, flag: &str| v.with_context(|| format!("--family {family:?} needs --{flag}").to_lowercase());
        Ok(match family {
            FamilyName::Dsg => GraphFamily::DualSierpinski { g: need(self.g, "g")? },
            FamilyName::Ct => GraphFamily::CayleyTree {
                z: self.z.unwrap_or(3),
                shells: self.shells.or(self.g).context("--family ct needs --shells")?,
            },
            FamilyName::Torus => GraphFamily::HypercubicTorus {
                d: self.d.unwrap_or(2),
                side: self.side.context("--family torus needs --L")?,
            },
            FamilyName::Ring => GraphFamily::Ring { n: self.n.context("--family ring needs --N")? },
            FamilyName::Chain => GraphFamily::Chain { n: self.n.context("--family chain needs --N")? },
            FamilyName::Complete => GraphFamily::Complete { n: self.n.context("--family complete needs --N")? },
        })
    }

    /// Apply parameter flags to a family that came from a config file.
    fn override_parameters(&self, family: GraphFamily) -> GraphFamily {
        match family {
            GraphFamily::DualSierpinski { g } => GraphFamily::DualSierpinski { g: self.g.unwrap_or(g) },
            GraphFamily::CayleyTree { z, shells } => GraphFamily::CayleyTree {
                z: self.z.unwrap_or(z),
                shells: self.shells.or(self.g).unwrap_or(shells),
            },
            GraphFamily::HypercubicTorus { d, side } => GraphFamily::HypercubicTorus {
                d: self.d.unwrap_or(d),
                side: self.side.unwrap_or(side),
            },
            GraphFamily::Ring { n } => GraphFamily::Ring { n: self.n.unwrap_or(n) },
            GraphFamily::Chain { n } => GraphFamily::Chain { n: self.n.unwrap_or(n) },
            GraphFamily::Complete { n } => GraphFamily::Complete { n: self.n.unwrap_or(n) },
        }
    }

    pub fn resolve(&self, file: Option<GraphFamily>) -> anyhow::Result<GraphFamily> {
        match (self.family, file) {
            (Some(name), _) => self.from_flags(name),
            (None, Some(family)) => Ok(self.override_parameters(family)),
            (None, None) if self.any_parameter() => bail!("graph parameters given without --family"),
            (None, None) => bail!("no graph given: pass --family or a config file with a \"graph\" entry"),
        }
    }
}

#[derive(Args, Debug, Default, Clone)]
pub struct RunArgs {
    /// JSON file mirroring the experiment configuration; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Last time of the grid (units of 1/gamma).
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Grid spacing (units of 1/gamma).
    #[arg(long)]
    pub step: Option<f64>,
    /// Hopping rate.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Start node (0-based).
    #[arg(long)]
    pub start: Option<usize>,
    /// Target nodes for per-sink time series (0-based, comma separated).
    #[arg(long, value_delimiter = ',')]
    pub sinks: Vec<usize>,
    /// Times at which full N×N snapshots are written.
    #[arg(long, value_delimiter = ',')]
    pub snapshots: Vec<f64>,
    /// Observables to compute (default: all).
    #[arg(long, value_enum, value_delimiter = ',')]
    pub observables: Vec<ObservableName>,
    /// Also evaluate the exact iterative DSG spectrum.
    #[arg(long)]
    pub exact: bool,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output format for spectra and series.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

fn non_empty<T: Clone>(v: &[T]) -> Option<Vec<T>> {
    if v.is_empty() { None } else { Some(v.to_vec()) }
}

fn read_file(path: &Path) -> anyhow::Result<FileConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
}

impl RunArgs {
    pub fn resolve(&self) -> anyhow::Result<ExperimentConfig> {
        let file = match &self.config {
            Some(path) => read_file(path)?,
            None => FileConfig::default(),
        };
        let grid = file.grid.unwrap_or_default();
        let output = file.output.unwrap_or_default();
        let mut observables = non_empty(&self.observables).or(file.observables).unwrap_or_else(|| ObservableName::ALL.to_vec());
        observables.sort();
        observables.dedup();
        let config = ExperimentConfig {
            graph: self.graph.resolve(file.graph)?,
            grid: GridConfig {
                t_max: self.t_max.or(grid.t_max).unwrap_or(DEFAULT_T_MAX),
                step: self.step.or(grid.step).unwrap_or(DEFAULT_STEP),
                gamma: self.gamma.or(grid.gamma).unwrap_or(1.0),
            },
            observables,
            output: OutputConfig {
                directory: self.out.clone().or(output.directory).unwrap_or_else(|| PathBuf::from("out")),
                format: self.format.or(output.format).unwrap_or_default(),
            },
            start: self.start.or(file.start),
            sinks: non_empty(&self.sinks).or(file.sinks).unwrap_or_default(),
            snapshots: non_empty(&self.snapshots).or(file.snapshots).unwrap_or_default(),
            exact: self.exact || file.exact.unwrap_or(false),
        };
        config.validate()?;
        Ok(config)
    }
}

/// File-name stem such as `dsg_g5` or `torus_d2_L16`.
pub fn stem(family: &GraphFamily) -> String {
    match *family {
        GraphFamily::DualSierpinski { g } => format!("dsg_g{g}"),
        GraphFamily::CayleyTree { z, shells } => format!("ct_z{z}_m{shells}"),
        GraphFamily::HypercubicTorus { d, side } => format!("torus_d{d}_L{side}"),
        GraphFamily::Ring { n } => format!("ring_N{n}"),
        GraphFamily::Chain { n } => format!("chain_N{n}"),
        GraphFamily::Complete { n } => format!("complete_N{n}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args() -> RunArgs {
        RunArgs { graph: GraphArgs { family: Some(FamilyName::Dsg), g: Some(3), ..Default::default() }, ..Default::default() }
    }

    #[test]
    fn defaults() {
        let c = args().resolve().unwrap();
        assert_eq!(c.graph, GraphFamily::DualSierpinski { g: 3 });
        assert_eq!((c.grid.t_max, c.grid.step, c.grid.gamma), (50.0, 0.05, 1.0));
        assert_eq!(c.observables.len(), ObservableName::ALL.len());
        assert_eq!(c.output.format, Format::Csv);
    }

    #[test]
    fn validation() {
        let mut a = args();
        a.step = Some(0.0);
        assert!(a.resolve().is_err());
        let mut a = args();
        a.step = Some(60.0);
        assert!(a.resolve().is_err());
        let mut a = args();
        a.start = Some(27);
        assert!(a.resolve().is_err());
        let mut a = args();
        a.graph.g = None;
        assert!(a.resolve().is_err());
        assert!(RunArgs::default().resolve().is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(
            &path,
            r#"{"graph":{"family":"cayley_tree","parameters":{"z":3,"shells":4}},"grid":{"t_max":10,"step":0.1}}"#,
        )
        .unwrap();
        let a = RunArgs { config: Some(path.clone()), step: Some(0.5), graph: GraphArgs { shells: Some(6), ..Default::default() }, ..Default::default() };
        let c = a.resolve().unwrap();
        assert_eq!(c.graph, GraphFamily::CayleyTree { z: 3, shells: 6 });
        assert_eq!((c.grid.t_max, c.grid.step), (10.0, 0.5));
        std::fs::write(&path, r#"{"grid":{"tmax":10}}"#).unwrap();
        assert!(RunArgs { config: Some(path), ..args() }.resolve().is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = args().resolve().unwrap();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        b.grid.step = 0.1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn stems() {
        assert_eq!(stem(&GraphFamily::HypercubicTorus { d: 2, side: 16 }), "torus_d2_L16");
        assert_eq!(stem(&GraphFamily::CayleyTree { z: 3, shells: 6 }), "ct_z3_m6");
    }
}
