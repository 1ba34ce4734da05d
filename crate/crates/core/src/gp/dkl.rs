use serde::{Deserialize, Serialize};

use crate::mlp::{mlp_init, MlpSpec, Network, ParamVector};
use crate::numkit::{Adam, Matrix, Rng};
use crate::{Error, Result};

use super::exact::{initial_theta, matern_objective, GpPriorConfig, GpState, MaternLayout};
use super::kernels::Kernel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DklConfig {
    pub iterations: usize,
    pub learning_rate: f64,
    pub restarts: usize,
    pub noise_floor: f64,
}

impl Default for DklConfig {
    fn default() -> Self {
        DklConfig { iterations: 500, learning_rate: 1e-2, restarts: 1, noise_floor: 1e-6 }
    }
}

/// Feature extractor for an architecture: the network without its output
/// layer, with the last hidden layer activated.
pub fn feature_spec(spec: &MlpSpec) -> Result<MlpSpec> {
    let Some((&last, rest)) = spec.hidden_widths.split_last() else {
        return Err(Error::InvalidConfig("deep kernel learning needs at least one hidden layer".into()));
    };
    Ok(MlpSpec { hidden_widths: rest.to_vec(), output_dim: last, ..spec.clone() })
}

/// Matérn GP on learned features g_w(x).
#[derive(Clone, Debug)]
pub struct DklState {
    pub features: MlpSpec,
    pub params: ParamVector,
    pub gp: GpState,
}

impl DklState {
    pub fn transform(&self, x: &Matrix) -> Result<Matrix> {
        Network::with_final_activation(&self.features).forward(&self.params, x)
    }

    pub fn predict(&self, xq: &Matrix) -> Result<(Vec<f64>, Matrix)> {
        self.gp.predict(&self.transform(xq)?)
    }
}

/// Joint objective (marginal likelihood plus hyperparameter log-priors)
/// over `[network weights, ln ℓ, ln s, u]` and its gradient.
pub fn dkl_objective(
    features: &MlpSpec,
    theta: &[f64],
    x: &Matrix,
    y: &[f64],
    prior: &GpPriorConfig,
    noise_floor: f64,
) -> Result<(f64, Vec<f64>)> {
    let net = Network::with_final_activation(features);
    let p = net.num_params();
    let layout = MaternLayout { lengthscales: 1, noise_floor };
    if theta.len() != p + layout.len() {
        return Err(Error::DimensionMismatch(format!("expected {} parameters, got {}", p + layout.len(), theta.len())));
    }
    let (weights, hypers) = theta.split_at(p);
    let tape = net.forward_tape(weights, x)?;
    let v = matern_objective(tape.output(), y, hypers, layout, prior, true)?;
    let mut grad = vec![0.0; theta.len()];
    net.backward(weights, &tape, v.input_grad.as_ref().expect("requested"), &mut grad[..p], false);
    grad[p..].copy_from_slice(&v.grad);
    if grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::NonFiniteLoss);
    }
    Ok((v.objective, grad))
}

/// Trains feature weights and kernel hyperparameters jointly by Adam.
pub fn dkl_fit(
    spec: &MlpSpec,
    x: &Matrix,
    y: &[f64],
    prior: &GpPriorConfig,
    opt: &DklConfig,
    rng: &mut Rng,
) -> Result<DklState> {
    let features = feature_spec(spec)?;
    features.validate()?;
    let p = features.num_params();
    let layout = MaternLayout { lengthscales: 1, noise_floor: opt.noise_floor };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..opt.restarts.max(1) {
        let mut theta = mlp_init(&features, rng).into_vec();
        theta.extend(initial_theta(layout, prior, rng));
        let mut adam = Adam::new(theta.len(), opt.learning_rate);
        for it in 0..=opt.iterations {
            let Ok((value, grad)) = dkl_objective(&features, &theta, x, y, prior, opt.noise_floor) else { break };
            if best.as_ref().is_none_or(|(b, _)| value > *b) {
                best = Some((value, theta.clone()));
            }
            if it == opt.iterations {
                break;
            }
            adam.ascend(&mut theta, &grad);
            for t in theta[p..].iter_mut() {
                *t = t.clamp(-30.0, 9.2);
            }
        }
    }
    let Some((objective, theta)) = best else {
        return Err(Error::FitFailed("deep kernel objective was non-finite at every restart".into()));
    };
    let (weights, hypers) = theta.split_at(p);
    let params = ParamVector(weights.to_vec());
    let feats = Network::with_final_activation(&features).forward(&params, x)?;
    let (h, noise) = layout.hypers(hypers);
    let mut gp = GpState::condition(Kernel::Matern52(h), noise, feats, y.to_vec())?;
    gp.diagnostics.objective = objective;
    gp.diagnostics.restarts = opt.restarts.max(1);
    Ok(DklState { features, params, gp })
}
