use std::path::Path;

use bnnbo_core::acquisition::{AcqConfig, AcquisitionRegistry};
use bnnbo_core::mlp::Activation;
use bnnbo_core::problems::{ProblemConfig, ProblemRegistry};
use bnnbo_core::surrogate::{SurrogateConfig, SurrogateRegistry};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n_init: usize,
    /// Points proposed per BO iteration.
    pub batch: usize,
    pub max_evals: usize,
    pub trials: usize,
    pub seed: u64,
    /// Worker threads; trials run in parallel when above one.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig { n_init: 10, batch: 5, max_evals: 100, trials: 5, seed: 0, threads: 1 }
    }
}

impl RunConfig {
    fn validate(&self) -> Result<()> {
        if self.n_init == 0 {
            return Err(HarnessError::config("run.n_init", "must be at least 1"));
        }
        if self.max_evals < self.n_init {
            return Err(HarnessError::config(
                "run.max_evals",
                format!("must be at least n_init = {}, got {}", self.n_init, self.max_evals),
            ));
        }
        if self.batch == 0 {
            return Err(HarnessError::config("run.batch", "must be at least 1"));
        }
        if self.trials == 0 {
            return Err(HarnessError::config("run.trials", "must be at least 1"));
        }
        if self.threads == 0 {
            return Err(HarnessError::config("run.threads", "must be at least 1"));
        }
        Ok(())
    }
}

/// One BO experiment: a problem, a surrogate, an acquisition and a budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoConfig {
    pub problem: ProblemConfig,
    #[serde(default)]
    pub surrogate: SurrogateConfig,
    #[serde(default)]
    pub acquisition: AcqConfig,
    #[serde(default)]
    pub run: RunConfig,
}

impl BoConfig {
    pub fn new(problem: ProblemConfig, surrogate: SurrogateConfig, run: RunConfig) -> Self {
        BoConfig { problem, surrogate, acquisition: AcqConfig::default(), run }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: BoConfig = parse_toml(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&read(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        validate_problem(&self.problem)?;
        validate_surrogate(&self.surrogate)?;
        validate_acquisition(&self.acquisition)?;
        self.run.validate()
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepMode {
    /// Posterior-predictive curves on the four-point toy.
    Posterior,
    /// Final reward of BO runs on a benchmark problem.
    Reward,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepGroup {
    LikelihoodVariance,
    PriorVariance,
    Depth,
    Width,
    Activation,
}

impl SweepGroup {
    pub fn name(self) -> &'static str {
        match self {
            SweepGroup::LikelihoodVariance => "likelihood_variance",
            SweepGroup::PriorVariance => "prior_variance",
            SweepGroup::Depth => "depth",
            SweepGroup::Width => "width",
            SweepGroup::Activation => "activation",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub mode: SweepMode,
    pub groups: Vec<SweepGroup>,
    pub likelihood_variance: Vec<f64>,
    pub prior_variance: Vec<f64>,
    pub depth: Vec<usize>,
    pub width: Vec<usize>,
    pub activation: Vec<Activation>,
    /// Dense grid size for posterior curves.
    pub grid_points: usize,
    /// Function draws emitted per posterior cell.
    pub draws: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            mode: SweepMode::Posterior,
            groups: vec![
                SweepGroup::LikelihoodVariance,
                SweepGroup::PriorVariance,
                SweepGroup::Depth,
                SweepGroup::Width,
                SweepGroup::Activation,
            ],
            likelihood_variance: vec![0.1, 1.0, 10.0],
            prior_variance: vec![0.1, 1.0, 10.0],
            depth: vec![2, 3, 4, 5],
            width: vec![64, 128, 256],
            activation: vec![Activation::Tanh, Activation::Relu],
            grid_points: 200,
            draws: 10,
        }
    }
}

fn hmc_surrogate() -> SurrogateConfig {
    SurrogateConfig::of_kind("hmc")
}

/// A one-factor-at-a-time architecture sweep around a base surrogate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default = "hmc_surrogate")]
    pub surrogate: SurrogateConfig,
    /// Benchmark for reward mode.
    #[serde(default)]
    pub problem: Option<ProblemConfig>,
    #[serde(default)]
    pub acquisition: AcqConfig,
    #[serde(default)]
    pub run: RunConfig,
}

pub const NETWORK_SURROGATES: [&str; 5] = ["dkl", "ensemble", "hmc", "lla", "sghmc"];

impl SweepConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: SweepConfig = parse_toml(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&read(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !NETWORK_SURROGATES.contains(&self.surrogate.kind.as_str()) {
            return Err(HarnessError::config(
                "surrogate.kind",
                format!("sweeps need a network surrogate ({}), got `{}`", NETWORK_SURROGATES.join(", "), self.surrogate.kind),
            ));
        }
        let s = &self.sweep;
        if s.groups.is_empty() {
            return Err(HarnessError::config("sweep.groups", "must name at least one group"));
        }
        let empty = [
            (SweepGroup::LikelihoodVariance, s.likelihood_variance.is_empty()),
            (SweepGroup::PriorVariance, s.prior_variance.is_empty()),
            (SweepGroup::Depth, s.depth.is_empty()),
            (SweepGroup::Width, s.width.is_empty()),
            (SweepGroup::Activation, s.activation.is_empty()),
        ];
        for (group, is_empty) in empty {
            if is_empty && s.groups.contains(&group) {
                return Err(HarnessError::config(format!("sweep.{}", group.name()), "swept group has no values"));
            }
        }
        if s.likelihood_variance.iter().chain(&s.prior_variance).any(|v| !(*v > 0.0)) {
            return Err(HarnessError::config("sweep", "variances must be positive"));
        }
        if s.width.contains(&0) {
            return Err(HarnessError::config("sweep.width", "widths must be positive"));
        }
        validate_surrogate(&self.surrogate)?;
        match s.mode {
            SweepMode::Posterior => {
                if s.grid_points < 2 {
                    return Err(HarnessError::config("sweep.grid_points", "must be at least 2"));
                }
            }
            SweepMode::Reward => {
                let problem = self.problem.as_ref().ok_or_else(|| HarnessError::config("problem", "reward sweeps need a problem"))?;
                validate_problem(problem)?;
                validate_acquisition(&self.acquisition)?;
                self.run.validate()?;
            }
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::io(format!("reading {}", path.display()), e))
}

fn parse_toml<T: DeserializeOwned>(text: &str) -> Result<T> {
    let table: toml::Table = text.parse().map_err(|e: toml::de::Error| HarnessError::config("<document>", e.to_string()))?;
    serde_path_to_error::deserialize(toml::Value::Table(table)).map_err(|e| {
        let path = e.path().to_string();
        let message = e.into_inner().to_string();
        let missing = message.strip_prefix("missing field `").and_then(|rest| rest.split('`').next());
        let key = match (path.as_str(), missing) {
            (".", Some(field)) => field.to_string(),
            (".", None) => "<root>".to_string(),
            (_, Some(field)) => format!("{path}.{field}"),
            (_, None) => path,
        };
        HarnessError::config(key, message)
    })
}

fn validate_problem(cfg: &ProblemConfig) -> Result<()> {
    if cfg.name.is_empty() {
        return Err(HarnessError::config("problem.name", "missing problem name"));
    }
    ProblemRegistry::global().build(cfg).map(drop).map_err(|e| HarnessError::config("problem", e.to_string()))
}

fn validate_surrogate(cfg: &SurrogateConfig) -> Result<()> {
    SurrogateRegistry::global().get(&cfg.kind).map(drop).map_err(|e| HarnessError::config("surrogate.kind", e.to_string()))
}

fn validate_acquisition(cfg: &AcqConfig) -> Result<()> {
    cfg.validate().map_err(|e| HarnessError::config("acquisition", e.to_string()))?;
    if cfg.kind != "auto" && !AcquisitionRegistry::global().names().contains(&cfg.kind.as_str()) {
        return Err(HarnessError::config(
            "acquisition.kind",
            format!("unknown acquisition `{}` (known: auto, {})", cfg.kind, AcquisitionRegistry::global().names().join(", ")),
        ));
    }
    Ok(())
}
