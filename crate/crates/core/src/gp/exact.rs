use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::numkit::{
    cholesky, cholesky_inverse, dot, gamma_logpdf, semidefinite_cholesky, standard_normal, tri_solve, Adam,
    Cholesky, Matrix, Rng,
};
use crate::{Error, Result};

use super::kernels::{matern52_profile, matern52_radial, IbnnKernelSpec, Kernel, Matern52Hypers};

const LN_2PI: f64 = 1.837_877_066_409_345_3;
const LOG_HYPER_RANGE: (f64, f64) = (-9.2, 9.2);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GammaPrior {
    pub shape: f64,
    pub rate: f64,
}

impl GammaPrior {
    pub fn log_density(&self, x: f64) -> f64 {
        gamma_logpdf(x, self.shape, self.rate).unwrap_or(f64::NEG_INFINITY)
    }

    /// Derivative of the log density with respect to ln x.
    fn dlog_dlogx(&self, x: f64) -> f64 {
        (self.shape - 1.0) - self.rate * x
    }

    fn sample(&self, rng: &mut Rng) -> f64 {
        Gamma::new(self.shape, 1.0 / self.rate).expect("prior parameters are positive").sample(rng)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GpPriorConfig {
    pub lengthscale: GammaPrior,
    pub outputscale: GammaPrior,
}

impl Default for GpPriorConfig {
    fn default() -> Self {
        GpPriorConfig {
            lengthscale: GammaPrior { shape: 3.0, rate: 6.0 },
            outputscale: GammaPrior { shape: 2.0, rate: 0.15 },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GpOptConfig {
    pub restarts: usize,
    pub iterations: usize,
    pub learning_rate: f64,
    pub noise_floor: f64,
    /// One lengthscale per input dimension.
    pub ard: bool,
}

impl Default for GpOptConfig {
    fn default() -> Self {
        GpOptConfig { restarts: 3, iterations: 200, learning_rate: 0.1, noise_floor: 1e-6, ard: false }
    }
}

/// Kernel family to fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum KernelChoice {
    Matern52,
    /// Fixed i-BNN kernel. `noise: None` learns the likelihood variance by
    /// maximizing the marginal likelihood; the kernel itself is never trained.
    Nngp { spec: IbnnKernelSpec, noise: Option<f64> },
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub mll: f64,
    /// Marginal likelihood plus hyperparameter log-priors at the chosen optimum.
    pub objective: f64,
    pub jitter: f64,
    pub restarts: usize,
    pub failed_restarts: usize,
}

/// Conditioned Gaussian process with zero prior mean.
#[derive(Clone, Debug)]
pub struct GpState {
    kernel: Kernel,
    noise: f64,
    x: Matrix,
    y: Vec<f64>,
    chol: Cholesky,
    alpha: Vec<f64>,
    pub diagnostics: FitDiagnostics,
}

impl GpState {
    /// Caches the Cholesky factor of K(X, X) + σ²I and α = (K + σ²I)⁻¹y.
    pub fn condition(kernel: Kernel, noise: f64, x: Matrix, y: Vec<f64>) -> Result<Self> {
        if x.rows() == 0 || x.rows() != y.len() {
            return Err(Error::DimensionMismatch(format!("{} inputs and {} targets", x.rows(), y.len())));
        }
        let mut k = kernel.gram(&x);
        k.add_diag(noise);
        let chol = cholesky(&k, 0.0)?;
        let alpha = chol.solve_vec(&y)?;
        let mut state = GpState { kernel, noise, x, y, chol, alpha, diagnostics: FitDiagnostics::default() };
        state.diagnostics.jitter = state.chol.jitter;
        state.diagnostics.mll = state.mll();
        state.diagnostics.objective = state.diagnostics.mll;
        Ok(state)
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn noise(&self) -> f64 {
        self.noise
    }

    pub fn inputs(&self) -> &Matrix {
        &self.x
    }

    pub fn targets(&self) -> &[f64] {
        &self.y
    }

    pub fn cholesky_factor(&self) -> &Matrix {
        &self.chol.factor
    }

    pub fn mll(&self) -> f64 {
        let n = self.y.len() as f64;
        -0.5 * dot(&self.y, &self.alpha) - 0.5 * self.chol.log_det() - 0.5 * n * LN_2PI
    }

    /// V = L⁻¹ K(X, Xq), one column per query.
    pub fn whiten(&self, xq: &Matrix) -> Result<Matrix> {
        tri_solve(&self.chol.factor, &self.kernel.matrix(&self.x, xq), false)
    }

    /// Posterior mean at each query given its whitened cross-covariance.
    pub fn mean_from_cross(&self, cross: &Matrix) -> Vec<f64> {
        cross.matvec(&self.alpha)
    }

    /// Latent posterior mean and covariance (no observation noise).
    pub fn predict(&self, xq: &Matrix) -> Result<(Vec<f64>, Matrix)> {
        let cross = self.kernel.matrix(xq, &self.x);
        let mean = cross.matvec(&self.alpha);
        let v = tri_solve(&self.chol.factor, &cross.transpose(), false)?;
        let mut cov = self.kernel.gram(xq);
        let reduce = v.matmul_tn(&v);
        for (c, r) in cov.as_mut_slice().iter_mut().zip(reduce.as_slice()) {
            *c -= r;
        }
        Ok((mean, cov))
    }

    /// Latent posterior marginal means and variances.
    pub fn predict_marginal(&self, xq: &Matrix) -> Result<(Vec<f64>, Vec<f64>)> {
        let v = self.whiten(xq)?;
        let kq = self.kernel.matrix(xq, &self.x);
        let mean = kq.matvec(&self.alpha);
        let prior = self.kernel.diag(xq);
        let var = (0..xq.rows())
            .map(|j| {
                let s: f64 = (0..v.rows()).map(|i| v[(i, j)] * v[(i, j)]).sum();
                (prior[j] - s).max(0.0)
            })
            .collect();
        Ok((mean, var))
    }

    /// S×q joint posterior draws.
    pub fn sample(&self, xq: &Matrix, count: usize, rng: &mut Rng) -> Result<Matrix> {
        let (mean, cov) = self.predict(xq)?;
        let l = semidefinite_cholesky(&cov)?;
        let q = mean.len();
        let mut out = Matrix::zeros(count, q);
        let mut z = vec![0.0; q];
        for s in 0..count {
            z.iter_mut().for_each(|v| *v = standard_normal(rng));
            let row = out.row_mut(s);
            for i in 0..q {
                row[i] = mean[i] + dot(&l.row(i)[..=i], &z[..=i]);
            }
        }
        Ok(out)
    }
}

pub fn gp_mll(state: &GpState) -> f64 {
    state.mll()
}

pub fn gp_predict(state: &GpState, xq: &Matrix) -> Result<(Vec<f64>, Matrix)> {
    state.predict(xq)
}

pub fn gp_sample(state: &GpState, xq: &Matrix, count: usize, rng: &mut Rng) -> Result<Matrix> {
    state.sample(xq, count, rng)
}

/// Fits hyperparameters and conditions on the data.
pub fn gp_fit(
    kernel: &KernelChoice,
    x: &Matrix,
    y: &[f64],
    prior: &GpPriorConfig,
    opt: &GpOptConfig,
    rng: &mut Rng,
) -> Result<GpState> {
    if x.rows() == 0 || x.rows() != y.len() {
        return Err(Error::DimensionMismatch(format!("{} inputs and {} targets", x.rows(), y.len())));
    }
    match kernel {
        KernelChoice::Matern52 => fit_matern(x, y, prior, opt, rng),
        KernelChoice::Nngp { spec, noise } => {
            spec.validate()?;
            let kernel = Kernel::Nngp(*spec);
            match noise {
                Some(noise) => GpState::condition(kernel, *noise, x.clone(), y.to_vec()),
                None => fit_noise_only(kernel, x, y, opt.noise_floor),
            }
        }
    }
}

/// Layout of the unconstrained vector: ln ℓ (1 or d entries), ln s, u with
/// σ² = floor + eᵘ.
#[derive(Clone, Copy, Debug)]
pub struct MaternLayout {
    pub lengthscales: usize,
    pub noise_floor: f64,
}

impl MaternLayout {
    pub fn len(&self) -> usize {
        self.lengthscales + 2
    }

    pub fn hypers(&self, theta: &[f64]) -> (Matern52Hypers, f64) {
        let k = self.lengthscales;
        let h = Matern52Hypers { lengthscales: theta[..k].iter().map(|t| t.exp()).collect(), outputscale: theta[k].exp() };
        (h, self.noise_floor + theta[k + 1].exp())
    }

    fn clamp(&self, theta: &mut [f64]) {
        for t in theta.iter_mut() {
            *t = t.clamp(LOG_HYPER_RANGE.0, LOG_HYPER_RANGE.1);
        }
        let u = &mut theta[self.lengthscales + 1];
        *u = u.max(-30.0);
    }
}

pub struct MaternValue {
    pub objective: f64,
    pub mll: f64,
    pub grad: Vec<f64>,
    /// ∂objective/∂inputs, when requested.
    pub input_grad: Option<Matrix>,
}

/// Log marginal likelihood plus Gamma log-priors on ℓ and s, with
/// gradients in the unconstrained parametrization.
pub fn matern_objective(
    x: &Matrix,
    y: &[f64],
    theta: &[f64],
    layout: MaternLayout,
    prior: &GpPriorConfig,
    want_inputs: bool,
) -> Result<MaternValue> {
    let (n, d) = x.shape();
    let (hypers, noise) = layout.hypers(theta);
    let ard = layout.lengthscales > 1;
    let inv_l2: Vec<f64> = if ard {
        hypers.lengthscales.iter().map(|l| 1.0 / (l * l)).collect()
    } else {
        vec![1.0 / (hypers.lengthscales[0] * hypers.lengthscales[0]); d]
    };
    let s = hypers.outputscale;

    let mut k0 = Matrix::zeros(n, n);
    let mut radial = Matrix::zeros(n, n);
    for i in 0..n {
        let xi = x.row(i);
        k0[(i, i)] = s;
        radial[(i, i)] = matern52_radial(0.0, s);
        for j in 0..i {
            let r2: f64 = xi.iter().zip(x.row(j)).zip(&inv_l2).map(|((a, b), w)| (a - b) * (a - b) * w).sum();
            let r = r2.sqrt();
            let kv = matern52_profile(r, s);
            let rv = matern52_radial(r, s);
            k0[(i, j)] = kv;
            k0[(j, i)] = kv;
            radial[(i, j)] = rv;
            radial[(j, i)] = rv;
        }
    }
    let mut k = k0.clone();
    k.add_diag(noise);
    let chol = cholesky(&k, 0.0)?;
    let alpha = chol.solve_vec(y)?;
    let mll = -0.5 * dot(y, &alpha) - 0.5 * chol.log_det() - 0.5 * n as f64 * LN_2PI;
    let kinv = cholesky_inverse(&chol.factor)?;

    // G = ααᵀ − K⁻¹, so ∂mll = ½ Σ G ∘ ∂K.
    let mut g = kinv;
    for i in 0..n {
        for j in 0..n {
            g[(i, j)] = alpha[i] * alpha[j] - g[(i, j)];
        }
    }

    let kl = layout.lengthscales;
    let mut grad = vec![0.0; layout.len()];
    let mut trace = 0.0;
    let mut input_grad = want_inputs.then(|| Matrix::zeros(n, d));
    for i in 0..n {
        trace += g[(i, i)];
        let xi = x.row(i).to_vec();
        grad[kl] += 0.5 * g[(i, i)] * k0[(i, i)];
        // G and ∂K are symmetric: visit each off-diagonal pair once.
        for j in 0..i {
            let gij = g[(i, j)];
            grad[kl] += gij * k0[(i, j)];
            let w = gij * radial[(i, j)];
            let xj = x.row(j).to_vec();
            if ard {
                for (c, ((a, b), il)) in xi.iter().zip(&xj).zip(&inv_l2).enumerate() {
                    grad[c] += w * (a - b) * (a - b) * il;
                }
            } else {
                let r2: f64 = xi.iter().zip(&xj).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() * inv_l2[0];
                grad[0] += w * r2;
            }
            if let Some(ig) = input_grad.as_mut() {
                for (c, ((a, b), il)) in xi.iter().zip(&xj).zip(&inv_l2).enumerate() {
                    let step = w * (a - b) * il;
                    ig[(i, c)] -= step;
                    ig[(j, c)] += step;
                }
            }
        }
    }
    grad[kl + 1] = 0.5 * (noise - layout.noise_floor) * trace;

    let mut objective = mll;
    for (c, l) in hypers.lengthscales.iter().enumerate() {
        objective += prior.lengthscale.log_density(*l);
        grad[c] += prior.lengthscale.dlog_dlogx(*l);
    }
    objective += prior.outputscale.log_density(s);
    grad[kl] += prior.outputscale.dlog_dlogx(s);

    if !objective.is_finite() || grad.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteLoss);
    }
    Ok(MaternValue { objective, mll, grad, input_grad })
}

pub(crate) fn initial_theta(layout: MaternLayout, prior: &GpPriorConfig, rng: &mut Rng) -> Vec<f64> {
    let mut theta = Vec::with_capacity(layout.len());
    for _ in 0..layout.lengthscales {
        theta.push(prior.lengthscale.sample(rng).max(1e-3).ln());
    }
    theta.push(prior.outputscale.sample(rng).max(1e-3).ln());
    let noise: f64 = 10f64.powf(-4.0 + 3.0 * rand::Rng::random::<f64>(rng));
    theta.push(noise.ln());
    let mut theta = theta;
    layout.clamp(&mut theta);
    theta
}

fn fit_matern(x: &Matrix, y: &[f64], prior: &GpPriorConfig, opt: &GpOptConfig, rng: &mut Rng) -> Result<GpState> {
    let layout = MaternLayout { lengthscales: if opt.ard { x.cols() } else { 1 }, noise_floor: opt.noise_floor };
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut failed = 0;
    for _ in 0..opt.restarts.max(1) {
        let mut theta = initial_theta(layout, prior, rng);
        let mut adam = Adam::new(layout.len(), opt.learning_rate);
        let mut any = false;
        for it in 0..=opt.iterations {
            let Ok(v) = matern_objective(x, y, &theta, layout, prior, false) else { break };
            any = true;
            if best.as_ref().is_none_or(|(b, _)| v.objective > *b) {
                best = Some((v.objective, theta.clone()));
            }
            if it == opt.iterations {
                break;
            }
            adam.ascend(&mut theta, &v.grad);
            layout.clamp(&mut theta);
        }
        if !any {
            failed += 1;
        }
    }
    let Some((objective, theta)) = best else {
        return Err(Error::FitFailed(format!("all {} restarts produced a non-finite marginal likelihood", opt.restarts)));
    };
    let (hypers, noise) = layout.hypers(&theta);
    let mut state = GpState::condition(Kernel::Matern52(hypers), noise, x.clone(), y.to_vec())?;
    state.diagnostics.objective = objective;
    state.diagnostics.restarts = opt.restarts.max(1);
    state.diagnostics.failed_restarts = failed;
    Ok(state)
}

/// Maximizes the marginal likelihood over the noise variance alone: a
/// log-spaced grid followed by golden-section refinement.
fn fit_noise_only(kernel: Kernel, x: &Matrix, y: &[f64], floor: f64) -> Result<GpState> {
    let gram = kernel.gram(x);
    let mll_at = |log_noise: f64| -> f64 {
        let mut k = gram.clone();
        k.add_diag(floor + log_noise.exp());
        let Ok(chol) = cholesky(&k, 0.0) else { return f64::NEG_INFINITY };
        let Ok(alpha) = chol.solve_vec(y) else { return f64::NEG_INFINITY };
        let v = -0.5 * dot(y, &alpha) - 0.5 * chol.log_det();
        if v.is_finite() { v } else { f64::NEG_INFINITY }
    };
    let (lo, hi) = ((1e-6f64).ln(), (1.0f64).ln());
    let grid: Vec<f64> = (0..=12).map(|i| lo + (hi - lo) * i as f64 / 12.0).collect();
    let values: Vec<f64> = grid.iter().map(|&u| mll_at(u)).collect();
    let (best_i, best_v) = values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    if !best_v.is_finite() {
        return Err(Error::FitFailed("marginal likelihood is non-finite for every noise level".into()));
    }
    let mut a = grid[best_i.saturating_sub(1)];
    let mut b = grid[(best_i + 1).min(grid.len() - 1)];
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (mll_at(c), mll_at(d));
    for _ in 0..20 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = mll_at(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = mll_at(d);
        }
    }
    let (u, _) = [(grid[best_i], best_v), (c, fc), (d, fd)]
        .into_iter()
        .fold((grid[best_i], f64::NEG_INFINITY), |acc, p| if p.1 > acc.1 { p } else { acc });
    GpState::condition(kernel, floor + u.exp(), x.clone(), y.to_vec())
}
