//! Oracle checks behind `selftest` and the acceptance suite. Each check
//! compares library output against an independent route to the same answer.

use std::path::PathBuf;
use std::time::Instant;

use bnnbo_core::acquisition::{hypervolume, hypervolume_2d, hypervolume_wfg, Acquisition, ExpectedImprovement};
use bnnbo_core::bnn::{ensemble_fit, hmc_sample, lla_fit, sghmc_sample, EnsembleConfig, HmcConfig, LlaConfig, SghmcConfig};
use bnnbo_core::gp::{
    dkl_objective, feature_spec, gp_fit, matern_objective, nngp_kernel, GpOptConfig, GpPriorConfig, IbnnKernelSpec,
    KernelChoice, MaternLayout,
};
use bnnbo_core::mlp::{cosine_similarity, log_joint_and_grad, mlp_init, Activation, MlpSpec, ParamVector};
use bnnbo_core::numkit::{finite_diff_grad, normal_cdf, normal_pdf, rng_from_seed, standard_normal, Matrix, Rng};
use bnnbo_core::problems::{branin, build_problem, ProblemConfig};
use bnnbo_core::surrogate::{fit, normalize, BaseSamples, Dataset, GpFamily, PosteriorModel, SurrogateConfig};
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::config::SweepGroup;
use crate::error::{HarnessError, Result};
use crate::experiment::run_experiment;
use crate::presets;
use crate::sweep::posterior_curve;

#[derive(Clone, Debug)]
pub struct Check {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let status = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{status} [{:>2}] {}: {} ({:.1}s)", self.id, self.name, self.detail, self.seconds)
    }
}

type Outcome = Result<(bool, String)>;

pub const CHECKS: [(usize, &str, fn() -> Outcome); 11] = [
    (1, "gradient oracles", gradient_oracles),
    (2, "conjugate posteriors", conjugate_posteriors),
    (3, "NNGP kernel vs finite networks", nngp_kernel_oracle),
    (4, "MC qEI vs closed-form EI", analytic_ei_oracle),
    (5, "hypervolume oracles", hypervolume_oracles),
    (6, "GP on Branin end to end", branin_end_to_end),
    (7, "i-BNN beats GP on NN draw d=100", high_dimensional_trend),
    (8, "MLL ordering", mll_ordering),
    (9, "ensemble diversity shrinks with less data", ensemble_diversity),
    (10, "HMC sensitivity trends", sensitivity_trends),
    (11, "determinism of summaries", determinism),
];

/// The fast oracle checks run by `selftest` without `--full`.
pub const QUICK: [usize; 5] = [1, 2, 3, 4, 5];

pub fn run_check(id: usize) -> Check {
    let (_, name, f) = CHECKS.iter().find(|c| c.0 == id).copied().expect("known check id");
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(r) => r,
        Err(e) => (false, format!("error: {e}")),
    };
    Check { id, name, passed, detail, seconds: start.elapsed().as_secs_f64() }
}

fn uniform(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random::<f64>())
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    diff / b.iter().map(|y| y * y).sum::<f64>().sqrt().max(1e-12)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn gradient_oracles() -> Outcome {
    let mut rng = rng_from_seed(101);
    let h = 1e-5;
    let mut mlp = 0.0f64;
    for fixture in 0..12 {
        let act = if fixture % 2 == 0 { Activation::Tanh } else { Activation::Relu };
        let spec = MlpSpec::new(3, vec![6; fixture % 5], 2, act).with_variances(2.0, 0.3);
        let (x, y) = (uniform(8, 3, &mut rng), uniform(8, 2, &mut rng));
        let params = mlp_init(&spec, &mut rng);
        let (_, grad) = log_joint_and_grad(&spec, &params, &x, &y, None)?;
        let fd = finite_diff_grad(|p| log_joint_and_grad(&spec, p, &x, &y, None).map_or(f64::NAN, |v| v.0), &params, h)?;
        mlp = mlp.max(rel_err(&grad, &fd));
    }
    let prior = GpPriorConfig::default();
    let mut gp = 0.0f64;
    for fixture in 0..12 {
        let d = 1 + fixture % 3;
        let x = uniform(15, d, &mut rng);
        let y: Vec<f64> = (0..15).map(|_| 2.0 * rng.random::<f64>() - 1.0).collect();
        let layout = MaternLayout { lengthscales: if fixture % 2 == 0 { 1 } else { d }, noise_floor: 1e-6 };
        let theta: Vec<f64> = (0..layout.len()).map(|_| 2.0 * rng.random::<f64>() - 1.5).collect();
        let v = matern_objective(&x, &y, &theta, layout, &prior, false)?;
        let fd = finite_diff_grad(
            |t| matern_objective(&x, &y, t, layout, &prior, false).map_or(f64::NAN, |v| v.objective),
            &theta,
            h,
        )?;
        gp = gp.max(rel_err(&v.grad, &fd));
    }
    let mut dkl = 0.0f64;
    for _ in 0..10 {
        let features = feature_spec(&MlpSpec::new(2, vec![4, 3], 1, Activation::Tanh))?;
        let x = uniform(5, 2, &mut rng);
        let y: Vec<f64> = (0..5).map(|_| rng.random::<f64>() - 0.5).collect();
        let mut theta = mlp_init(&features, &mut rng).into_vec();
        theta.extend([rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, -2.0 - rng.random::<f64>()]);
        let (_, grad) = dkl_objective(&features, &theta, &x, &y, &prior, 1e-6)?;
        let fd = finite_diff_grad(|t| dkl_objective(&features, t, &x, &y, &prior, 1e-6).map_or(f64::NAN, |v| v.0), &theta, h)?;
        dkl = dkl.max(rel_err(&grad, &fd));
    }
    let passed = mlp < 1e-4 && gp < 1e-4 && dkl < 1e-4;
    Ok((passed, format!("max relative error: log-joint {mlp:.1e}, GP MLL {gp:.1e}, DKL {dkl:.1e} (limit 1e-4)")))
}

fn gauss_jordan_inverse(a: &Matrix) -> Matrix {
    let n = a.rows();
    let mut m = Matrix::from_fn(n, 2 * n, |i, j| if j < n { a[(i, j)] } else if j - n == i { 1.0 } else { 0.0 });
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[(i, c)].abs().total_cmp(&m[(j, c)].abs())).expect("nonempty");
        for j in 0..2 * n {
            let t = m[(c, j)];
            m[(c, j)] = m[(p, j)];
            m[(p, j)] = t;
        }
        let d = m[(c, c)];
        for j in 0..2 * n {
            m[(c, j)] /= d;
        }
        for i in (0..n).filter(|&i| i != c) {
            let f = m[(i, c)];
            for j in 0..2 * n {
                m[(i, j)] -= f * m[(c, j)];
            }
        }
    }
    Matrix::from_fn(n, n, |i, j| m[(i, j + n)])
}

fn with_intercept(x: &Matrix) -> Matrix {
    Matrix::from_fn(x.rows(), x.cols() + 1, |i, j| if j < x.cols() { x[(i, j)] } else { 1.0 })
}

/// Bayesian linear regression posterior (mean, covariance) over (w, b).
fn conjugate(x: &Matrix, y: &[f64], noise: f64, prior: f64) -> (Vec<f64>, Matrix) {
    let phi = with_intercept(x);
    let mut precision = phi.matmul_tn(&phi);
    precision.scale(1.0 / noise);
    precision.add_diag(1.0 / prior);
    let cov = gauss_jordan_inverse(&precision);
    let rhs: Vec<f64> = phi.transpose().matvec(y).iter().map(|v| v / noise).collect();
    (cov.matvec(&rhs), cov)
}

fn linear_data(n: usize, d: usize, noise: f64, seed: u64) -> (Matrix, Matrix) {
    let mut rng = rng_from_seed(seed);
    let x = Matrix::from_fn(n, d, |_, _| 2.0 * rng.random::<f64>() - 1.0);
    let truth: Vec<f64> = (0..=d).map(|_| standard_normal(&mut rng)).collect();
    let y = Matrix::from_fn(n, 1, |i, _| {
        (0..d).map(|j| truth[j] * x[(i, j)]).sum::<f64>() + truth[d] + noise.sqrt() * standard_normal(&mut rng)
    });
    (x, y)
}

/// Mean, variance and 20-batch-means standard error of one chain coordinate.
fn chain_stats(chain: &[ParamVector], coord: usize) -> (f64, f64, f64) {
    let v: Vec<f64> = chain.iter().map(|p| p[coord]).collect();
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let batches = 20;
    let size = v.len() / batches;
    let means: Vec<f64> = (0..batches).map(|b| v[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64).collect();
    let bvar = means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / (batches - 1) as f64;
    (mean, var, (bvar / batches as f64).sqrt())
}

/// Worst |mean error| in standard errors and worst relative variance error.
fn chain_vs_truth(chain: &[ParamVector], mean: &[f64], cov: &Matrix) -> (f64, f64) {
    (0..mean.len()).fold((0.0f64, 0.0f64), |(z, v), c| {
        let (m, var, se) = chain_stats(chain, c);
        (z.max((m - mean[c]).abs() / se), v.max((var / cov[(c, c)] - 1.0).abs()))
    })
}

fn conjugate_posteriors() -> Outcome {
    let (noise, prior) = (0.5, 1.0);
    let spec = MlpSpec::new(2, vec![], 1, Activation::Tanh).with_variances(prior, noise);

    let (x, y) = linear_data(20, 2, noise, 1);
    let (mean, cov) = conjugate(&x, y.as_slice(), noise, prior);
    let cfg = HmcConfig { kept_samples: 4000, thinning: 1, ..HmcConfig::default() };
    let hmc = hmc_sample(&spec, &x, &y, &cfg, &mut rng_from_seed(2))?;
    let (hmc_z, hmc_var) = chain_vs_truth(&hmc.samples, &mean, &cov);

    let (x, y) = linear_data(20, 2, noise, 3);
    let (mean, cov) = conjugate(&x, y.as_slice(), noise, prior);
    let cfg = SghmcConfig { iterations: 30_000, burn_in: 5_000, kept_samples: 1000, ..SghmcConfig::default() };
    let sghmc = sghmc_sample(&spec, &x, &y, &cfg, &mut rng_from_seed(4))?;
    let (sg_z, sg_var) = chain_vs_truth(&sghmc.samples, &mean, &cov);

    let spec3 = MlpSpec::new(3, vec![], 1, Activation::Tanh).with_variances(prior, noise);
    let (x, y) = linear_data(12, 3, noise, 14);
    let (mean, cov) = conjugate(&x, y.as_slice(), noise, prior);
    let state = lla_fit(&spec3, &x, &y, &LlaConfig::default(), &mut rng_from_seed(1))?;
    let mut rng = rng_from_seed(2);
    let xq = Matrix::from_fn(5, 3, |_, _| 2.0 * rng.random::<f64>() - 1.0);
    let (lla_mean, lla_cov) = state.predict(&xq, 0)?;
    let phi = with_intercept(&xq);
    let expect_cov = phi.matmul(&cov).matmul_nt(&phi);
    let lla_err = phi
        .matvec(&mean)
        .iter()
        .zip(&lla_mean)
        .map(|(a, b)| (a - b).abs())
        .fold(lla_cov.max_abs_diff(&expect_cov), f64::max);

    let passed = hmc_z < 3.0 && hmc_var < 0.15 && sg_z < 3.0 && sg_var < 0.30 && lla_err < 1e-6;
    Ok((
        passed,
        format!(
            "HMC mean {hmc_z:.2} SE (<3), var {:.1}% (<15%); SGHMC mean {sg_z:.2} SE (<3), var {:.1}% (<30%); LLA max error {lla_err:.1e} (<1e-6)",
            100.0 * hmc_var,
            100.0 * sg_var
        ),
    ))
}

const NNGP_WIDTH: usize = 8192;
const NNGP_NETWORKS: usize = 24;
const WEIGHT_BLOCK: usize = 256;

/// Empirical output covariance of one random ReLU network with `width`
/// units per hidden layer; the readout layer is integrated exactly.
fn finite_network_covariance(x: &Matrix, spec: &IbnnKernelSpec, width: usize, rng: &mut Rng) -> Matrix {
    let n = x.rows();
    let mut h = x.clone();
    for _ in 0..spec.depth {
        let fan_in = h.cols();
        let w_sd = (spec.weight_variance / fan_in as f64).sqrt();
        let b_sd = spec.bias_variance.sqrt();
        let mut next = Matrix::zeros(n, width);
        for start in (0..width).step_by(WEIGHT_BLOCK) {
            let rows = WEIGHT_BLOCK.min(width - start);
            let w = Matrix::from_fn(rows, fan_in, |_, _| w_sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng));
            let z = h.matmul_nt(&w);
            for u in 0..rows {
                let b = b_sd * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng);
                for i in 0..n {
                    next[(i, start + u)] = (z[(i, u)] + b).max(0.0);
                }
            }
        }
        h = next;
    }
    let mut k = h.matmul_nt(&h);
    k.scale(spec.weight_variance / width as f64);
    k.as_mut_slice().iter_mut().for_each(|v| *v += spec.bias_variance);
    k
}

fn nngp_kernel_oracle() -> Outcome {
    let spec = IbnnKernelSpec::default();
    let x = uniform(20, 3, &mut rng_from_seed(31));
    let mut mc = (0..NNGP_NETWORKS)
        .into_par_iter()
        .map(|i| finite_network_covariance(&x, &spec, NNGP_WIDTH, &mut rng_from_seed(1000 + i as u64)))
        .reduce(|| Matrix::zeros(20, 20), |mut a, b| {
            a.as_mut_slice().iter_mut().zip(b.as_slice()).for_each(|(u, v)| *u += v);
            a
        });
    mc.scale(1.0 / NNGP_NETWORKS as f64);
    let mut worst = 0.0f64;
    for i in 0..20 {
        for j in 0..=i {
            let exact = nngp_kernel(x.row(i), x.row(j), &spec);
            worst = worst.max((mc[(i, j)] / exact - 1.0).abs());
        }
    }
    Ok((worst < 0.03, format!("max entrywise relative error {:.2}% over 20 points, {NNGP_NETWORKS} networks of width {NNGP_WIDTH} (<3%)", 100.0 * worst)))
}

fn analytic_ei(mu: f64, sigma: f64, best: f64) -> f64 {
    let z = (mu - best) / sigma;
    sigma * (z * normal_cdf(z) + normal_pdf(z))
}

fn analytic_ei_oracle() -> Outcome {
    let mut rng = rng_from_seed(41);
    let mut worst = 0.0f64;
    for fixture in 0..20 {
        let d = 1 + fixture % 3;
        let n = 8 + fixture;
        let x = uniform(n, d, &mut rng);
        let y: Vec<f64> = (0..n).map(|i| (0..d).map(|j| (4.0 * x[(i, j)] + j as f64).sin()).sum()).collect();
        let opt = GpOptConfig { iterations: 60, ..GpOptConfig::default() };
        let gp = gp_fit(&KernelChoice::Matern52, &x, &y, &GpPriorConfig::default(), &opt, &mut rng)?;
        let best = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let pool = uniform(256, d, &mut rng);
        let (mu, var) = gp.predict_marginal(&pool)?;
        let ei: Vec<f64> = (0..256).map(|i| analytic_ei(mu[i], var[i].sqrt(), best)).collect();
        let i = (0..256).max_by(|&a, &b| ei[a].total_cmp(&ei[b])).expect("nonempty pool");
        let model = GpFamily { heads: vec![Box::new(gp)] };
        let base = BaseSamples::sobol(8192, 1, 1, &mut rng);
        let f = model.scorer(&base)?.candidates(&pool.select_rows(&[i]))?;
        let mc = ExpectedImprovement { incumbent: best }.prepare(&[]).score(&f[0]);
        worst = worst.max((mc / ei[i] - 1.0).abs());
    }
    Ok((worst < 0.02, format!("max relative deviation {:.2}% over 20 fitted-GP fixtures, S=8192 (<2%)", 100.0 * worst)))
}

fn random_front(rng: &mut Rng, n: usize, m: usize, grid: bool) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let mut p: Vec<f64> = (0..m).map(|_| standard_normal(rng).abs() + 0.05).collect();
            let norm = p.iter().map(|v| v * v).sum::<f64>().sqrt();
            p.iter_mut().for_each(|v| *v /= norm);
            if grid {
                p.iter_mut().for_each(|v| *v = (*v * 64.0).round() / 64.0);
            }
            p
        })
        .collect()
}

fn hypervolume_oracles() -> Outcome {
    let mut rng = rng_from_seed(51);
    let mut mismatches = 0;
    let mut continuous = 0.0f64;
    for i in 0..100 {
        let n = 1 + i % 40;
        let grid = random_front(&mut rng, n, 2, true);
        if hypervolume_2d(&grid, &[0.0, 0.0]) != hypervolume_wfg(&grid, &[0.0, 0.0]) {
            mismatches += 1;
        }
        let cont = random_front(&mut rng, n, 2, false);
        let (a, b) = (hypervolume_2d(&cont, &[-0.1, 0.0]), hypervolume_wfg(&cont, &[-0.1, 0.0]));
        continuous = continuous.max((a - b).abs() / a.abs());
    }
    let mut worst = 0.0f64;
    for n in [5, 17, 30] {
        let front = random_front(&mut rng, n, 3, false);
        let exact = hypervolume(&front, &[0.0; 3]);
        let total = 1_000_000;
        let hits = (0..total)
            .filter(|_| {
                let u = [rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()];
                front.iter().any(|p| p.iter().zip(&u).all(|(a, b)| a >= b))
            })
            .count();
        worst = worst.max((hits as f64 / total as f64 / exact - 1.0).abs());
    }
    let passed = mismatches == 0 && continuous <= 1e-12 && worst < 0.01;
    Ok((
        passed,
        format!(
            "2-D sweep vs recursion: {mismatches} inexact of 100 dyadic fronts, {continuous:.1e} relative on continuous fronts; recursion vs 1e6-sample Monte Carlo {:.2}% (<1%)",
            100.0 * worst
        ),
    ))
}

/// Branin maximum by a dense grid refined with compass search.
pub fn branin_optimum() -> f64 {
    let f = |x: f64, y: f64| -branin(x, y);
    let n = 2000;
    let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..=n {
        for j in 0..=n {
            let (x, y) = (-5.0 + 15.0 * i as f64 / n as f64, 15.0 * j as f64 / n as f64);
            let v = f(x, y);
            if v > best.0 {
                best = (v, x, y);
            }
        }
    }
    let (mut v, mut x, mut y) = best;
    let mut step = 15.0 / n as f64;
    while step > 1e-12 {
        let moves = [(step, 0.0), (-step, 0.0), (0.0, step), (0.0, -step)];
        match moves.iter().map(|(dx, dy)| (f(x + dx, y + dy), x + dx, y + dy)).find(|c| c.0 > v) {
            Some(c) => (v, x, y) = c,
            None => step *= 0.5,
        }
    }
    v
}

fn branin_end_to_end() -> Outcome {
    let cfg = presets::experiment("branin_gp")?;
    let optimum = branin_optimum();
    let out = scratch_dir("branin")?;
    let result = run_experiment(&cfg, &out);
    let _ = std::fs::remove_dir_all(&out);
    let result = result?;
    let regrets: Vec<f64> = result.final_bests().iter().map(|b| optimum - b).collect();
    let med = median(regrets.clone());
    let shown: Vec<String> = regrets.iter().map(|r| format!("{r:.4}")).collect();
    Ok((
        med <= 0.1,
        format!(
            "{} trials x {} evals: median regret {med:.4} (<=0.1) against oracle optimum {optimum:.6}; per trial [{}]",
            cfg.run.trials,
            cfg.run.max_evals,
            shown.join(", ")
        ),
    ))
}

fn high_dimensional_trend() -> Outcome {
    let mut medians = Vec::new();
    let mut finals = Vec::new();
    for name in ["nn_draw_ibnn", "nn_draw_gp"] {
        let cfg = presets::experiment(name)?;
        let out = scratch_dir(name)?;
        let result = run_experiment(&cfg, &out);
        let _ = std::fs::remove_dir_all(&out);
        let bests = result?.final_bests();
        medians.push(median(bests.clone()));
        finals.push(bests.iter().map(|b| format!("{b:.3}")).collect::<Vec<_>>().join(", "));
    }
    Ok((
        medians[0] > medians[1],
        format!("median final best i-BNN {:.4} vs GP {:.4}; i-BNN [{}], GP [{}]", medians[0], medians[1], finals[0], finals[1]),
    ))
}

fn probe_data(problem: &ProblemConfig, count: usize, seed: u64) -> Result<Dataset> {
    let p = build_problem(problem)?;
    let bounds = p.info().bounds.clone();
    let mut rng = rng_from_seed(seed);
    let mut data = Dataset::new(bounds.clone(), p.info().objectives)?;
    for _ in 0..count {
        let x: Vec<f64> = bounds.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect();
        let y = p.evaluate(&x)?;
        data.push(&x, &y);
    }
    Ok(data)
}

fn fitted_mll(kind: &str, data: &Dataset) -> Result<f64> {
    let fitted = fit(&SurrogateConfig::of_kind(kind), data, &mut rng_from_seed(7))?;
    let mll = fitted.mll().ok_or_else(|| HarnessError::Runtime(format!("{kind} reports no marginal likelihood")))?;
    Ok(mll[0])
}

fn mll_ordering() -> Outcome {
    let mut nn = ProblemConfig::named("nn_draw");
    nn.dim = Some(100);
    let data = probe_data(&nn, 1000, 81)?;
    let (ibnn, gp) = (fitted_mll("ibnn", &data)?, fitted_mll("gp", &data)?);
    let branin = probe_data(&ProblemConfig::named("branin"), 1000, 82)?;
    let (b_ibnn, b_gp) = (fitted_mll("ibnn", &branin)?, fitted_mll("gp", &branin)?);
    let passed = ibnn > gp && b_ibnn.is_finite() && b_gp.is_finite();
    Ok((
        passed,
        format!(
            "NN draw d=100: i-BNN {ibnn:.1} vs GP {gp:.1}; Branin: i-BNN {b_ibnn:.1} vs GP {b_gp:.1} ({})",
            if b_ibnn > b_gp { "i-BNN higher" } else { "GP higher" }
        ),
    ))
}

/// Median pairwise cosine similarity of ensemble members on `n` DTLZ1 points.
pub fn ensemble_cosine(n: usize, seed: u64) -> Result<f64> {
    let cfg = presets::experiment("dtlz1_gp")?;
    let data = probe_data(&cfg.problem, n, seed)?;
    let (x, y, _) = normalize(&data)?;
    let spec = cfg.surrogate.network.spec(x.cols(), y.cols());
    let post = ensemble_fit(&spec, &x, &y, &EnsembleConfig::default(), &mut rng_from_seed(seed ^ 0xE5))?;
    let mut sims = Vec::new();
    for i in 0..post.samples.len() {
        for j in i + 1..post.samples.len() {
            sims.push(cosine_similarity(&post.samples[i], &post.samples[j])?);
        }
    }
    Ok(median(sims))
}

fn ensemble_diversity() -> Outcome {
    let mut wins = 0;
    let mut shown = Vec::new();
    for seed in 0..5 {
        let (few, many) = (ensemble_cosine(10, seed)?, ensemble_cosine(100, seed)?);
        if few > many {
            wins += 1;
        }
        shown.push(format!("{few:.4}/{many:.4}"));
    }
    Ok((wins >= 4, format!("10-point median cosine above 100-point in {wins} of 5 seeds (>=4); per seed [{}]", shown.join(", "))))
}

fn sensitivity_trends() -> Outcome {
    let cfg = presets::sweep("sweep_posterior")?;
    let cells: Vec<_> = crate::sweep::cells(&cfg)
        .into_iter()
        .filter(|c| {
            (c.group == SweepGroup::PriorVariance && ["0.1", "1", "10"].contains(&c.value.as_str()))
                || (c.group == SweepGroup::Depth && ["2", "4"].contains(&c.value.as_str()))
        })
        .collect();
    let stds = cells
        .par_iter()
        .map(|c| posterior_curve(&c.surrogate, cfg.sweep.grid_points, 0, cfg.run.seed).map(|p| p.between_std))
        .collect::<Result<Vec<_>>>()?;
    let (prior, depth) = (&stds[..3], &stds[3..]);
    let passed = prior[0] <= prior[1] && prior[1] <= prior[2] && depth[1] > depth[0];
    Ok((
        passed,
        format!(
            "between-data std by prior variance 0.1/1/10: {:.3}/{:.3}/{:.3}; depth 2 vs 4: {:.3} vs {:.3}",
            prior[0], prior[1], prior[2], depth[0], depth[1]
        ),
    ))
}

fn scratch_dir(tag: &str) -> Result<PathBuf> {
    let nanos = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_nanos());
    let dir = std::env::temp_dir().join(format!("bnnbo-{tag}-{}-{nanos}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| HarnessError::io(format!("creating {}", dir.display()), e))?;
    Ok(dir)
}

fn determinism() -> Outcome {
    let mut gp = presets::experiment("branin_gp")?;
    gp.run.max_evals = 25;
    gp.run.trials = 2;
    let mut ensemble = presets::experiment("branin_currin_gp")?;
    ensemble.surrogate.kind = "ensemble".into();
    ensemble.surrogate.ensemble.iterations = 200;
    ensemble.run.max_evals = 16;
    ensemble.run.batch = 3;
    ensemble.run.trials = 2;
    let mut identical = Vec::new();
    for (tag, cfg) in [("gp", gp), ("ensemble", ensemble)] {
        let mut bytes = Vec::new();
        for _ in 0..2 {
            let dir = scratch_dir(tag)?;
            let run = run_experiment(&cfg, &dir);
            let read = std::fs::read(dir.join("summary.csv"));
            let _ = std::fs::remove_dir_all(&dir);
            run?;
            bytes.push(read.map_err(|e| HarnessError::io("reading summary.csv", e))?);
        }
        identical.push((tag, bytes[0] == bytes[1] && !bytes[0].is_empty()));
    }
    let shown: Vec<String> = identical.iter().map(|(t, same)| format!("{t}: {}", if *same { "identical" } else { "differs" })).collect();
    Ok((identical.iter().all(|(_, same)| *same), format!("summary.csv across reruns with threads=1: {}", shown.join(", "))))
}
