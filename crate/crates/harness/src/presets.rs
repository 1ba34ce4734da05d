//! Experiment presets shipped in `configs/`.

use crate::config::{BoConfig, SweepConfig};
use crate::error::{HarnessError, Result};

pub const EXPERIMENTS: &[(&str, &str)] = &[
    ("ackley_gp", include_str!("../../../configs/ackley_gp.toml")),
    ("branin_currin_gp", include_str!("../../../configs/branin_currin_gp.toml")),
    ("branin_gp", include_str!("../../../configs/branin_gp.toml")),
    ("branin_hmc", include_str!("../../../configs/branin_hmc.toml")),
    ("dtlz1_gp", include_str!("../../../configs/dtlz1_gp.toml")),
    ("dtlz5_gp", include_str!("../../../configs/dtlz5_gp.toml")),
    ("hartmann6_gp", include_str!("../../../configs/hartmann6_gp.toml")),
    ("nn_draw_gp", include_str!("../../../configs/nn_draw_gp.toml")),
    ("nn_draw_ibnn", include_str!("../../../configs/nn_draw_ibnn.toml")),
    ("nonstationary_gp", include_str!("../../../configs/nonstationary_gp.toml")),
    ("polynomial_gp", include_str!("../../../configs/polynomial_gp.toml")),
];

pub const SWEEPS: &[(&str, &str)] = &[
    ("sweep_posterior", include_str!("../../../configs/sweep_posterior.toml")),
    ("sweep_reward", include_str!("../../../configs/sweep_reward.toml")),
];

fn find<'a>(table: &'a [(&str, &str)], name: &str) -> Result<&'a str> {
    table.iter().find(|(n, _)| *n == name).map(|(_, text)| *text).ok_or_else(|| {
        let known: Vec<&str> = table.iter().map(|(n, _)| *n).collect();
        HarnessError::config("preset", format!("unknown preset `{name}` (known: {})", known.join(", ")))
    })
}

pub fn experiment(name: &str) -> Result<BoConfig> {
    BoConfig::from_toml_str(find(EXPERIMENTS, name)?)
}

pub fn sweep(name: &str) -> Result<SweepConfig> {
    SweepConfig::from_toml_str(find(SWEEPS, name)?)
}
