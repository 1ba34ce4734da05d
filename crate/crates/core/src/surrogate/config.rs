use serde::{Deserialize, Serialize};

use crate::bnn::{EnsembleConfig, HmcConfig, LlaConfig, SghmcConfig};
use crate::gp::{DklConfig, GpOptConfig, GpPriorConfig, IbnnKernelSpec};
use crate::mlp::{Activation, MlpSpec};

/// Hidden architecture and variances of a finite network surrogate; input
/// and output sizes come from the data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub hidden_widths: Vec<usize>,
    pub activation: Activation,
    pub prior_variance: f64,
    pub likelihood_variance: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig { hidden_widths: vec![128; 3], activation: Activation::Tanh, prior_variance: 10.0, likelihood_variance: 0.1 }
    }
}

impl NetworkConfig {
    pub fn spec(&self, inputs: usize, outputs: usize) -> MlpSpec {
        MlpSpec::new(inputs, self.hidden_widths.clone(), outputs, self.activation)
            .with_variances(self.prior_variance, self.likelihood_variance)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IbnnConfig {
    pub kernel: IbnnKernelSpec,
    /// Fixed observation noise; learned by marginal likelihood when absent.
    pub noise: Option<f64>,
}

/// Which surrogate to fit and every strategy's settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurrogateConfig {
    /// Registry name.
    pub kind: String,
    /// Series name in outputs; defaults to `kind`.
    pub label: Option<String>,
    pub network: NetworkConfig,
    pub gp: GpOptConfig,
    pub gp_prior: GpPriorConfig,
    pub ibnn: IbnnConfig,
    pub dkl: DklConfig,
    pub hmc: HmcConfig,
    pub sghmc: SghmcConfig,
    pub ensemble: EnsembleConfig,
    pub lla: LlaConfig,
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        SurrogateConfig::of_kind("gp")
    }
}

impl SurrogateConfig {
    pub fn of_kind(kind: &str) -> Self {
        SurrogateConfig {
            kind: kind.to_string(),
            label: None,
            network: NetworkConfig::default(),
            gp: GpOptConfig::default(),
            gp_prior: GpPriorConfig::default(),
            ibnn: IbnnConfig::default(),
            dkl: DklConfig::default(),
            hmc: HmcConfig::default(),
            sghmc: SghmcConfig::default(),
            ensemble: EnsembleConfig::default(),
            lla: LlaConfig::default(),
        }
    }

    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.kind)
    }
}
