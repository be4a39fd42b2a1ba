//! Experiment configuration, read from JSON or assembled from CLI flags.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::combinatorics::MassPartition;
use crate::dislocation::{check_alphagamma, DiscreteDislocation, NuAtom};
use crate::error::{Error, Result};
use crate::spine::PositiveLaw;
use crate::treemetric::{TreeModel, TreeStatistic};

/// Experiments known to the runner.
pub const EXPERIMENTS: &[&str] = &[
    "split-table",
    "grow",
    "consistency",
    "sampling-consistency",
    "gnedin",
    "renewal",
    "pjs",
    "reduced-crt",
    "exponent",
    "gh-stabilize",
    "classify",
];

/// Model families accepted in configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    AlphaGamma { alpha: f64, gamma: f64 },
    SkewedPd { alpha: f64, theta: f64, lambda: f64 },
    /// One atom `(1/2, 1/2)` of weight 1 in `ν₁`, nothing above.
    SingleAtom,
    Dislocation { model: DiscreteDislocation },
    /// Star trees, for calibrating the exponent fit.
    Star,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        match self {
            ModelSpec::AlphaGamma { alpha, gamma } => check_alphagamma(*alpha, *gamma),
            ModelSpec::SkewedPd { alpha, theta, lambda } => {
                crate::dislocation::skewed_pd_ranked_split(*alpha, *theta, *lambda, 2).map(|_| ())
            }
            _ => Ok(()),
        }
    }

    /// The dislocation measure behind the model, if it has one.
    pub fn dislocation(&self) -> Option<DiscreteDislocation> {
        match self {
            ModelSpec::SingleAtom => Some(DiscreteDislocation::single_atom()),
            ModelSpec::Dislocation { model } => Some(model.clone()),
            _ => None,
        }
    }

    pub fn tree_model(&self) -> Result<TreeModel> {
        match self {
            ModelSpec::AlphaGamma { alpha, gamma } => Ok(TreeModel::AlphaGamma {
                alpha: *alpha,
                gamma: *gamma,
            }),
            ModelSpec::Star => Ok(TreeModel::Star),
            _ => match self.dislocation() {
                Some(model) => Ok(TreeModel::Dislocation { model }),
                None => Err(Error::arg("model has no tree sampler")),
            },
        }
    }
}

/// Output format for stdout.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

impl FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            _ => Err(Error::arg(format!("unknown format {s:?}, expected json or csv"))),
        }
    }
}

fn default_reps() -> u64 {
    1
}

/// Everything needed to reproduce a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub model: Option<ModelSpec>,
    #[serde(default)]
    pub n_grid: Vec<usize>,
    #[serde(default = "default_reps")]
    pub reps: u64,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
    /// Number of marked leaves.
    #[serde(default)]
    pub k: Option<usize>,
    /// Self-similarity or tail index.
    #[serde(default)]
    pub index: Option<f64>,
    /// Law of inter-arrival times or of `-log Y`.
    #[serde(default)]
    pub law: Option<PositiveLaw>,
    /// Record multiplicities; the last entry repeats.
    #[serde(default)]
    pub psi: Option<Vec<usize>>,
    #[serde(default)]
    pub t_grid: Vec<f64>,
    #[serde(default)]
    pub p: Option<u32>,
    /// Window length for spine experiments.
    #[serde(default)]
    pub window: Option<f64>,
    #[serde(default)]
    pub statistic: Option<TreeStatistic>,
}

impl ExperimentConfig {
    pub fn new(experiment: &str) -> Self {
        ExperimentConfig {
            experiment: experiment.to_string(),
            model: None,
            n_grid: Vec::new(),
            reps: 1,
            master_seed: 0,
            output: None,
            format: OutputFormat::Json,
            k: None,
            index: None,
            law: None,
            psi: None,
            t_grid: Vec::new(),
            p: None,
            window: None,
            statistic: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::arg(format!("bad config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !EXPERIMENTS.contains(&self.experiment.as_str()) {
            return Err(Error::arg(format!("unknown experiment {:?}", self.experiment)));
        }
        if self.reps == 0 {
            return Err(Error::arg("reps must be at least 1"));
        }
        if let Some(m) = &self.model {
            m.validate()?;
        }
        if let Some(l) = &self.law {
            l.validate()?;
        }
        if self.psi.as_ref().is_some_and(|p| p.is_empty() || p.contains(&0)) {
            return Err(Error::arg("psi must hold positive integers"));
        }
        Ok(())
    }
}

/// Parses `a,b,c` into numbers.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|x| x.trim().parse::<T>().map_err(|_| Error::arg(format!("bad list entry {x:?}"))))
        .collect()
}

/// Parses `exp:RATE`, `pareto:INDEX[,SCALE]` or `det:VALUE`.
pub fn parse_law(s: &str) -> Result<PositiveLaw> {
    let (name, rest) = s.split_once(':').ok_or_else(|| Error::arg(format!("law {s:?} needs NAME:PARAMS")))?;
    let v: Vec<f64> = parse_list(rest)?;
    let law = match (name, v.as_slice()) {
        ("exp", [rate]) => PositiveLaw::Exponential { rate: *rate },
        ("pareto", [index]) => PositiveLaw::Pareto { index: *index, scale: 1.0 },
        ("pareto", [index, scale]) => PositiveLaw::Pareto {
            index: *index,
            scale: *scale,
        },
        ("det", [value]) => PositiveLaw::Deterministic { value: *value },
        _ => return Err(Error::arg(format!("unknown law {s:?}"))),
    };
    law.validate()?;
    Ok(law)
}

/// A one-level model with the given atom at level `level` and `m_cap = level + 1`.
pub fn one_atom_model(atoms: Vec<f64>, weight: f64, level: usize) -> Result<DiscreteDislocation> {
    if level == 0 {
        return Err(Error::arg("levels start at 1"));
    }
    let mut levels = vec![Vec::new(); level];
    levels[level - 1].push(NuAtom {
        s: MassPartition::new(atoms)?,
        weight,
    });
    DiscreteDislocation::conservative(level + 1, levels)
}
