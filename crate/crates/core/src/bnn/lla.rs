use serde::{Deserialize, Serialize};

use crate::gp::{GpState, Kernel};
use crate::mlp::{mlp_init, MlpSpec, OutputJacobian, ParamVector};
use crate::numkit::{dot, Matrix, Rng};
use crate::Result;

use super::check_data;
use super::map::{map_fit, MapConfig};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LlaConfig {
    pub map: MapConfig,
}

/// Linearized Laplace posterior: per objective, a GP over parameter
/// Jacobians J(x) with kernel σ_p²·J(x)J(x')ᵀ, noise σ², and prior mean
/// h(x|θ*) − J(x)θ*.
#[derive(Clone, Debug)]
pub struct LlaState {
    pub spec: MlpSpec,
    pub theta: ParamVector,
    pub gps: Vec<GpState>,
}

impl LlaState {
    /// Jacobian rows of output `k` at each query and the linearized prior mean there.
    pub fn features(&self, xq: &Matrix, k: usize) -> Result<(Matrix, Vec<f64>)> {
        jacobian_features(&self.spec, &self.theta, xq, k)
    }

    /// Latent predictive mean and covariance of objective `k`.
    pub fn predict(&self, xq: &Matrix, k: usize) -> Result<(Vec<f64>, Matrix)> {
        let (j, offset) = self.features(xq, k)?;
        let (mut mean, cov) = self.gps[k].predict(&j)?;
        for (m, o) in mean.iter_mut().zip(&offset) {
            *m += o;
        }
        Ok((mean, cov))
    }
}

pub(crate) fn jacobian_features(spec: &MlpSpec, theta: &[f64], x: &Matrix, k: usize) -> Result<(Matrix, Vec<f64>)> {
    let p = theta.len();
    let mut feats = Matrix::zeros(x.rows(), p);
    let mut offset = Vec::with_capacity(x.rows());
    for i in 0..x.rows() {
        let jac = OutputJacobian::new(spec, theta, x.row(i), k)?;
        let g = jac.gradient();
        offset.push(jac.value() - dot(&g, theta));
        feats.row_mut(i).copy_from_slice(&g);
    }
    Ok((feats, offset))
}

pub fn lla_fit(spec: &MlpSpec, x: &Matrix, y: &Matrix, cfg: &LlaConfig, rng: &mut Rng) -> Result<LlaState> {
    check_data(spec, x, y)?;
    let init = mlp_init(spec, rng);
    let theta = map_fit(spec, x, y, init, &cfg.map)?;
    let mut gps = Vec::with_capacity(spec.output_dim);
    for k in 0..spec.output_dim {
        let (feats, offset) = jacobian_features(spec, &theta, x, k)?;
        let targets: Vec<f64> = (0..x.rows()).map(|i| y[(i, k)] - offset[i]).collect();
        let kernel = Kernel::Linear { variance: spec.prior_variance };
        gps.push(GpState::condition(kernel, spec.likelihood_variance, feats, targets)?);
    }
    Ok(LlaState { spec: spec.clone(), theta, gps })
}
