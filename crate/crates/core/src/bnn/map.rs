use serde::{Deserialize, Serialize};

use crate::mlp::{log_joint_and_grad, MlpSpec, ParamVector};
use crate::numkit::{Adam, Matrix};
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapConfig {
    pub iterations: usize,
    pub learning_rate: f64,
}

impl Default for MapConfig {
    fn default() -> Self {
        MapConfig { iterations: 1000, learning_rate: 1e-2 }
    }
}

/// Full-batch Adam ascent on the log joint from `init`.
pub fn map_fit(spec: &MlpSpec, x: &Matrix, y: &Matrix, init: ParamVector, cfg: &MapConfig) -> Result<ParamVector> {
    let mut theta = init;
    let mut adam = Adam::new(theta.len(), cfg.learning_rate);
    for it in 0..cfg.iterations {
        let (_, grad) = log_joint_and_grad(spec, &theta, x, y, None)
            .map_err(|e| Error::FitFailed(format!("MAP iteration {it}: {e}")))?;
        adam.ascend(&mut theta, &grad);
    }
    if theta.iter().any(|v| !v.is_finite()) {
        return Err(Error::FitFailed("MAP estimate is non-finite".into()));
    }
    Ok(theta)
}
