use rand::seq::index::sample as sample_indices;
use serde::{Deserialize, Serialize};

use crate::mlp::{log_joint_and_grad, mlp_init, MlpSpec, OutputJacobian, ParamVector};
use crate::numkit::{dot, standard_normal, Matrix, Rng};
use crate::{Error, Result};

use super::{check_data, subset, SamplerDiagnostics, WeightPosterior};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SghmcConfig {
    pub minibatch_size: usize,
    /// η; `None` derives it from `step_scale`.
    pub step_size: Option<f64>,
    /// η = step_scale / λ, with λ the trace bound on the log-posterior
    /// curvature at the initial state.
    pub step_scale: f64,
    /// Friction α.
    pub friction: f64,
    pub iterations: usize,
    pub burn_in: usize,
    pub kept_samples: usize,
}

impl Default for SghmcConfig {
    fn default() -> Self {
        SghmcConfig { minibatch_size: 5, step_size: None, step_scale: 2e-3, friction: 0.05, iterations: 5000, burn_in: 2000, kept_samples: 100 }
    }
}

/// Σᵢ Σₖ ‖∂hₖ(xᵢ)/∂θ‖²/σ² + 1/σ_p², an upper bound on the largest
/// Gauss-Newton curvature of the negative log posterior.
pub fn curvature_bound(spec: &MlpSpec, theta: &[f64], x: &Matrix) -> Result<f64> {
    let mut total = 0.0;
    for i in 0..x.rows() {
        let mut jac = OutputJacobian::new(spec, theta, x.row(i), 0)?;
        for k in 0..spec.output_dim {
            jac.set_output(k);
            let g = jac.gradient();
            total += dot(&g, &g);
        }
    }
    Ok(total / spec.likelihood_variance + 1.0 / spec.prior_variance)
}

/// Stochastic-gradient HMC:
/// v ← (1−α)v + η∇log p̃(θ) + N(0, 2αη), θ ← θ + v.
pub fn sghmc_sample(spec: &MlpSpec, x: &Matrix, y: &Matrix, cfg: &SghmcConfig, rng: &mut Rng) -> Result<WeightPosterior> {
    check_data(spec, x, y)?;
    let n = x.rows();
    if cfg.minibatch_size == 0 || cfg.kept_samples == 0 || cfg.burn_in >= cfg.iterations {
        return Err(Error::InvalidConfig("SGHMC needs minibatch_size, kept_samples >= 1 and burn_in < iterations".into()));
    }
    if !(cfg.friction > 0.0 && cfg.friction <= 1.0) {
        return Err(Error::InvalidConfig(format!("SGHMC friction must lie in (0, 1], got {}", cfg.friction)));
    }
    let batch = cfg.minibatch_size.min(n);
    let mut theta = mlp_init(spec, rng).into_vec();
    let eta = match cfg.step_size {
        Some(eta) => eta,
        None => cfg.step_scale / curvature_bound(spec, &theta, x)?,
    };
    let alpha = cfg.friction;
    let noise_sd = (2.0 * alpha * eta).sqrt();
    let weights = vec![n as f64 / batch as f64; batch];
    let post = cfg.iterations - cfg.burn_in;
    let thinning = (post / cfg.kept_samples).max(1);

    let mut v = vec![0.0; theta.len()];
    let mut samples = Vec::with_capacity(cfg.kept_samples);
    for it in 0..cfg.iterations {
        let (_, grad) = if batch == n {
            log_joint_and_grad(spec, &theta, x, y, None)
        } else {
            let idx = sample_indices(rng, n, batch).into_vec();
            let (xb, yb) = subset(x, y, &idx);
            log_joint_and_grad(spec, &theta, &xb, &yb, Some(&weights))
        }
        .map_err(|_| Error::NonFiniteState(it))?;
        for ((vi, t), g) in v.iter_mut().zip(theta.iter_mut()).zip(grad.iter()) {
            *vi = (1.0 - alpha) * *vi + eta * g + noise_sd * standard_normal(rng);
            *t += *vi;
        }
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::NonFiniteState(it));
        }
        if it >= cfg.burn_in && (it - cfg.burn_in + 1) % thinning == 0 && samples.len() < cfg.kept_samples {
            samples.push(ParamVector(theta.clone()));
        }
    }
    let diagnostics = SamplerDiagnostics { step_size: eta, proposals: cfg.iterations, accept_rate: 1.0, ..Default::default() };
    WeightPosterior::new(spec.clone(), samples, diagnostics)
}
