use std::path::PathBuf;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::mlp::{log_joint_and_grad, mlp_init, write_params, MlpSpec, ParamVector};
use crate::numkit::{dot, standard_normal, Matrix, Rng};
use crate::{Error, Result};

use super::{check_data, SamplerDiagnostics, WeightPosterior};

const DIVERGENCE: f64 = 1000.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HmcConfig {
    pub leapfrog_steps: usize,
    pub target_accept: f64,
    pub burn_in: usize,
    pub kept_samples: usize,
    pub thinning: usize,
    pub init_step_size: f64,
    /// Each proposal uses ε·U(1 − j, 1 + j).
    pub step_jitter: f64,
    /// Writes the kept chain here after sampling.
    pub checkpoint: Option<PathBuf>,
}

impl Default for HmcConfig {
    fn default() -> Self {
        HmcConfig {
            leapfrog_steps: 50,
            target_accept: 0.75,
            burn_in: 200,
            kept_samples: 100,
            thinning: 2,
            init_step_size: 1e-2,
            step_jitter: 0.1,
            checkpoint: None,
        }
    }
}

impl HmcConfig {
    fn validate(&self) -> Result<()> {
        if self.kept_samples == 0 || self.thinning == 0 || self.leapfrog_steps == 0 {
            return Err(Error::InvalidConfig("HMC needs kept_samples, thinning and leapfrog_steps >= 1".into()));
        }
        if !(self.target_accept > 0.0 && self.target_accept < 1.0) {
            return Err(Error::InvalidConfig(format!("target_accept must lie in (0, 1), got {}", self.target_accept)));
        }
        if !(self.init_step_size > 0.0) || !(0.0..1.0).contains(&self.step_jitter) {
            return Err(Error::InvalidConfig("HMC step size must be positive and jitter in [0, 1)".into()));
        }
        Ok(())
    }
}

/// Potential U = −log joint with its gradient.
struct Target<'a> {
    spec: &'a MlpSpec,
    x: &'a Matrix,
    y: &'a Matrix,
}

impl Target<'_> {
    fn potential(&self, theta: &[f64]) -> Result<(f64, Vec<f64>)> {
        let (lj, g) = log_joint_and_grad(self.spec, theta, self.x, self.y, None)?;
        Ok((-lj, g.into_vec().into_iter().map(|v| -v).collect()))
    }
}

struct Trajectory {
    theta: Vec<f64>,
    potential: f64,
    grad: Vec<f64>,
    kinetic: f64,
}

/// L leapfrog steps from (θ, p); `None` when the state leaves the finite range.
fn leapfrog(
    target: &Target<'_>,
    theta: &[f64],
    grad: &[f64],
    mut p: Vec<f64>,
    eps: f64,
    steps: usize,
) -> Option<Trajectory> {
    let mut theta = theta.to_vec();
    let mut grad = grad.to_vec();
    let mut potential = 0.0;
    for (pi, g) in p.iter_mut().zip(&grad) {
        *pi -= 0.5 * eps * g;
    }
    for step in 0..steps {
        for (t, pi) in theta.iter_mut().zip(&p) {
            *t += eps * pi;
        }
        let (u, g) = target.potential(&theta).ok()?;
        potential = u;
        grad = g;
        let scale = if step + 1 == steps { 0.5 * eps } else { eps };
        for (pi, g) in p.iter_mut().zip(&grad) {
            *pi -= scale * g;
        }
    }
    let kinetic = 0.5 * dot(&p, &p);
    (potential.is_finite() && kinetic.is_finite()).then_some(Trajectory { theta, potential, grad, kinetic })
}

/// Energy change H(end) − H(start) of one leapfrog trajectory.
pub fn hamiltonian_error(
    spec: &MlpSpec,
    x: &Matrix,
    y: &Matrix,
    theta: &[f64],
    momentum: &[f64],
    step_size: f64,
    steps: usize,
) -> Result<f64> {
    let target = Target { spec, x, y };
    let (u0, g0) = target.potential(theta)?;
    let k0 = 0.5 * dot(momentum, momentum);
    let end = leapfrog(&target, theta, &g0, momentum.to_vec(), step_size, steps).ok_or(Error::NonFiniteLoss)?;
    Ok(end.potential + end.kinetic - u0 - k0)
}

/// Dual-averaging step-size adaptation.
struct DualAveraging {
    mu: f64,
    target: f64,
    h_bar: f64,
    log_eps: f64,
    log_eps_bar: f64,
    m: f64,
}

impl DualAveraging {
    const GAMMA: f64 = 0.05;
    const T0: f64 = 10.0;
    const KAPPA: f64 = 0.75;

    fn new(eps0: f64, target: f64) -> Self {
        DualAveraging { mu: (10.0 * eps0).ln(), target, h_bar: 0.0, log_eps: eps0.ln(), log_eps_bar: 0.0, m: 0.0 }
    }

    fn update(&mut self, accept_prob: f64) {
        self.m += 1.0;
        let w = 1.0 / (self.m + Self::T0);
        self.h_bar = (1.0 - w) * self.h_bar + w * (self.target - accept_prob);
        self.log_eps = self.mu - self.m.sqrt() / Self::GAMMA * self.h_bar;
        let eta = self.m.powf(-Self::KAPPA);
        self.log_eps_bar = eta * self.log_eps + (1.0 - eta) * self.log_eps_bar;
    }

    fn current(&self) -> f64 {
        self.log_eps.exp()
    }

    fn final_step(&self) -> f64 {
        if self.m == 0.0 { self.current() } else { self.log_eps_bar.exp() }
    }
}

fn momentum(len: usize, rng: &mut Rng) -> Vec<f64> {
    (0..len).map(|_| standard_normal(rng)).collect()
}

/// Doubles or halves ε until a single leapfrog step's acceptance
/// probability crosses one half.
fn initial_step_size(target: &Target<'_>, theta: &[f64], u: f64, grad: &[f64], eps0: f64, rng: &mut Rng) -> f64 {
    let log_accept = |eps: f64, rng: &mut Rng| -> f64 {
        let p = momentum(theta.len(), rng);
        let k0 = 0.5 * dot(&p, &p);
        match leapfrog(target, theta, grad, p, eps, 1) {
            Some(t) => (u + k0 - t.potential - t.kinetic).min(0.0),
            None => f64::NEG_INFINITY,
        }
    };
    let mut eps = eps0;
    let half = 0.5f64.ln();
    let dir = if log_accept(eps, rng) > half { 1.0 } else { -1.0 };
    for _ in 0..60 {
        let next = eps * 2f64.powf(dir);
        let la = log_accept(next, rng);
        if (dir > 0.0 && la <= half) || (dir < 0.0 && la > half) {
            return if dir > 0.0 { eps } else { next };
        }
        eps = next;
    }
    eps
}

/// Full-batch HMC over network weights.
pub fn hmc_sample(spec: &MlpSpec, x: &Matrix, y: &Matrix, cfg: &HmcConfig, rng: &mut Rng) -> Result<WeightPosterior> {
    check_data(spec, x, y)?;
    cfg.validate()?;
    let target = Target { spec, x, y };
    let mut theta = mlp_init(spec, rng).into_vec();
    let (mut u, mut grad) = target.potential(&theta)?;
    let eps0 = initial_step_size(&target, &theta, u, &grad, cfg.init_step_size, rng);
    let mut adapt = DualAveraging::new(eps0, cfg.target_accept);

    let sampling = cfg.kept_samples * cfg.thinning;
    let mut samples = Vec::with_capacity(cfg.kept_samples);
    let (mut accepted, mut divergences) = (0usize, 0usize);
    let mut eps = eps0;
    for it in 0..cfg.burn_in + sampling {
        let burning = it < cfg.burn_in;
        if burning {
            eps = adapt.current();
        } else if it == cfg.burn_in {
            eps = adapt.final_step();
        }
        let jitter = 1.0 + cfg.step_jitter * (2.0 * rng.random::<f64>() - 1.0);
        let p = momentum(theta.len(), rng);
        let h0 = u + 0.5 * dot(&p, &p);
        let proposal = leapfrog(&target, &theta, &grad, p, eps * jitter, cfg.leapfrog_steps);
        let accept_prob = match &proposal {
            Some(t) => {
                let dh = t.potential + t.kinetic - h0;
                if dh.abs() > DIVERGENCE {
                    if !burning {
                        divergences += 1;
                    }
                    0.0
                } else {
                    (-dh).exp().min(1.0)
                }
            }
            None => {
                if !burning {
                    divergences += 1;
                }
                0.0
            }
        };
        if accept_prob > 0.0 && rng.random::<f64>() < accept_prob {
            let t = proposal.expect("accepted proposals are finite");
            theta = t.theta;
            u = t.potential;
            grad = t.grad;
            if !burning {
                accepted += 1;
            }
        }
        if burning {
            adapt.update(accept_prob);
        } else if (it - cfg.burn_in + 1) % cfg.thinning == 0 {
            samples.push(ParamVector(theta.clone()));
        }
    }
    if divergences * 10 > sampling * 9 {
        return Err(Error::AllDiverged { diverged: divergences, total: sampling });
    }
    if let Some(path) = &cfg.checkpoint {
        write_params(std::io::BufWriter::new(std::fs::File::create(path)?), spec, &samples)?;
    }
    let diagnostics = SamplerDiagnostics {
        accept_rate: accepted as f64 / sampling as f64,
        divergences,
        proposals: sampling,
        step_size: eps,
        failed_members: 0,
    };
    WeightPosterior::new(spec.clone(), samples, diagnostics)
}
