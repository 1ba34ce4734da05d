use bnnbo_core::bnn::{
    ensemble_fit, hamiltonian_error, hmc_sample, lla_fit, map_fit, predictive_draws, sghmc_sample, EnsembleConfig,
    HmcConfig, LlaConfig, MapConfig, SamplerDiagnostics, SghmcConfig, WeightPosterior,
};
use bnnbo_core::mlp::{
    interpolate_loss, log_joint_and_grad, mlp_forward, mlp_init, read_params, Activation, MlpSpec, ParamVector,
};
use bnnbo_core::numkit::{rng_from_seed, standard_normal, Matrix, Rng};
use rand::Rng as _;

/// Bayesian linear regression posterior over (w, b) by Gauss-Jordan inversion.
struct Conjugate {
    mean: Vec<f64>,
    cov: Matrix,
}

fn invert(a: &Matrix) -> Matrix {
    let n = a.rows();
    let mut m = Matrix::from_fn(n, 2 * n, |i, j| if j < n { a[(i, j)] } else if j - n == i { 1.0 } else { 0.0 });
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[(i, c)].abs().total_cmp(&m[(j, c)].abs())).unwrap();
        for j in 0..2 * n {
            let t = m[(c, j)];
            m[(c, j)] = m[(p, j)];
            m[(p, j)] = t;
        }
        let d = m[(c, c)];
        for j in 0..2 * n {
            m[(c, j)] /= d;
        }
        for i in 0..n {
            if i != c {
                let f = m[(i, c)];
                for j in 0..2 * n {
                    m[(i, j)] -= f * m[(c, j)];
                }
            }
        }
    }
    Matrix::from_fn(n, n, |i, j| m[(i, j + n)])
}

fn design(x: &Matrix) -> Matrix {
    Matrix::from_fn(x.rows(), x.cols() + 1, |i, j| if j < x.cols() { x[(i, j)] } else { 1.0 })
}

fn conjugate(x: &Matrix, y: &[f64], noise: f64, prior: f64) -> Conjugate {
    let phi = design(x);
    let mut precision = phi.matmul_tn(&phi);
    precision.scale(1.0 / noise);
    precision.add_diag(1.0 / prior);
    let cov = invert(&precision);
    let rhs: Vec<f64> = phi.transpose().matvec(y).iter().map(|v| v / noise).collect();
    Conjugate { mean: cov.matvec(&rhs), cov }
}

fn linear_problem(n: usize, d: usize, noise: f64, seed: u64) -> (Matrix, Matrix) {
    let mut rng = rng_from_seed(seed);
    let x = Matrix::from_fn(n, d, |_, _| 2.0 * rng.random::<f64>() - 1.0);
    let truth: Vec<f64> = (0..=d).map(|_| standard_normal(&mut rng)).collect();
    let y = Matrix::from_fn(n, 1, |i, _| {
        (0..d).map(|j| truth[j] * x[(i, j)]).sum::<f64>() + truth[d] + noise.sqrt() * standard_normal(&mut rng)
    });
    (x, y)
}

/// Mean and batch-means standard error of one coordinate across a chain.
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

fn linear_spec(d: usize) -> MlpSpec {
    MlpSpec::new(d, vec![], 1, Activation::Tanh).with_variances(1.0, 0.5)
}

#[test]
fn hmc_matches_conjugate_posterior() {
    let spec = linear_spec(2);
    let (x, y) = linear_problem(20, 2, 0.5, 1);
    let truth = conjugate(&x, y.as_slice(), 0.5, 1.0);
    let cfg = HmcConfig { kept_samples: 4000, thinning: 1, ..HmcConfig::default() };
    let post = hmc_sample(&spec, &x, &y, &cfg, &mut rng_from_seed(2)).unwrap();
    for c in 0..3 {
        let (mean, var, se) = chain_stats(&post.samples, c);
        assert!((mean - truth.mean[c]).abs() < 3.0 * se, "coord {c}: {mean} vs {} (se {se})", truth.mean[c]);
        let rel = (var / truth.cov[(c, c)] - 1.0).abs();
        assert!(rel < 0.15, "coord {c}: variance {var} vs {}", truth.cov[(c, c)]);
    }
}

fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            i += 1;
        } else {
            j += 1;
        }
        d = d.max((i as f64 / a.len() as f64 - j as f64 / b.len() as f64).abs());
    }
    d
}

#[test]
fn hmc_marginals_pass_two_sample_ks() {
    let spec = linear_spec(1);
    let mut passes = 0;
    for seed in 0..5 {
        let (x, y) = linear_problem(15, 1, 0.5, 10 + seed);
        let truth = conjugate(&x, y.as_slice(), 0.5, 1.0);
        let cfg = HmcConfig { kept_samples: 1000, thinning: 2, ..HmcConfig::default() };
        let mut rng = rng_from_seed(20 + seed);
        let post = hmc_sample(&spec, &x, &y, &cfg, &mut rng).unwrap();
        let hmc: Vec<f64> = post.samples.iter().map(|p| p[0]).collect();
        let sd = truth.cov[(0, 0)].sqrt();
        let exact: Vec<f64> = (0..1000).map(|_| truth.mean[0] + sd * standard_normal(&mut rng)).collect();
        if ks_statistic(hmc, exact) < 1.628 * (2.0f64 / 1000.0).sqrt() {
            passes += 1;
        }
    }
    assert!(passes >= 4, "{passes} of 5 seeds passed");
}

#[test]
fn sghmc_matches_conjugate_posterior() {
    let spec = linear_spec(2);
    let (x, y) = linear_problem(20, 2, 0.5, 3);
    let truth = conjugate(&x, y.as_slice(), 0.5, 1.0);
    let cfg = SghmcConfig { iterations: 30_000, burn_in: 5_000, kept_samples: 1000, ..SghmcConfig::default() };
    let post = sghmc_sample(&spec, &x, &y, &cfg, &mut rng_from_seed(4)).unwrap();
    for c in 0..3 {
        let (mean, var, se) = chain_stats(&post.samples, c);
        assert!((mean - truth.mean[c]).abs() < 3.0 * se, "coord {c}: {mean} vs {} (se {se})", truth.mean[c]);
        let rel = (var / truth.cov[(c, c)] - 1.0).abs();
        assert!(rel < 0.30, "coord {c}: variance {var} vs {}", truth.cov[(c, c)]);
    }
}

#[test]
fn full_batch_sghmc_is_underdamped_langevin() {
    let spec = MlpSpec::new(1, vec![4], 1, Activation::Tanh);
    let x = Matrix::from_rows(&[vec![-0.5], vec![0.1], vec![0.7]]);
    let y = Matrix::from_rows(&[vec![0.2], vec![-0.3], vec![0.9]]);
    let (eta, alpha) = (1e-3, 0.05);
    let cfg = SghmcConfig {
        minibatch_size: 3,
        step_size: Some(eta),
        friction: alpha,
        iterations: 300,
        burn_in: 200,
        kept_samples: 10,
        ..SghmcConfig::default()
    };
    let post = sghmc_sample(&spec, &x, &y, &cfg, &mut rng_from_seed(7)).unwrap();

    let mut rng = rng_from_seed(7);
    let mut theta = mlp_init(&spec, &mut rng).into_vec();
    let mut v = vec![0.0; theta.len()];
    let mut kept = Vec::new();
    for it in 0..300 {
        let (_, g) = log_joint_and_grad(&spec, &theta, &x, &y, None).unwrap();
        for i in 0..theta.len() {
            v[i] = (1.0 - alpha) * v[i] + eta * g[i] + (2.0 * alpha * eta).sqrt() * standard_normal(&mut rng);
            theta[i] += v[i];
        }
        if it >= 200 && (it - 199) % 10 == 0 {
            kept.push(ParamVector(theta.clone()));
        }
    }
    assert_eq!(post.samples, kept);
}

#[test]
fn engines_are_deterministic() {
    let spec = MlpSpec::new(2, vec![6], 1, Activation::Tanh).with_variances(1.0, 0.1);
    let (x, y) = linear_problem(12, 2, 0.1, 5);
    let small_hmc = HmcConfig { burn_in: 20, kept_samples: 10, leapfrog_steps: 10, ..HmcConfig::default() };
    let small_sghmc = SghmcConfig { iterations: 400, burn_in: 200, kept_samples: 10, ..SghmcConfig::default() };
    let small_ens = EnsembleConfig { n_models: 3, iterations: 50, ..EnsembleConfig::default() };
    let small_lla = LlaConfig { map: MapConfig { iterations: 50, learning_rate: 1e-2 } };
    for seed in [1u64, 2] {
        let run = |s: u64| {
            let mut rng = rng_from_seed(s);
            (
                hmc_sample(&spec, &x, &y, &small_hmc, &mut rng).unwrap().samples,
                sghmc_sample(&spec, &x, &y, &small_sghmc, &mut rng).unwrap().samples,
                ensemble_fit(&spec, &x, &y, &small_ens, &mut rng).unwrap().samples,
                lla_fit(&spec, &x, &y, &small_lla, &mut rng).unwrap().theta,
            )
        };
        assert_eq!(run(seed), run(seed));
    }
}

#[test]
fn symmetric_data_gives_even_predictive_mean() {
    let spec = MlpSpec::new(1, vec![8], 1, Activation::Tanh).with_variances(1.0, 0.05);
    let xs = [-0.9, -0.5, -0.2, 0.2, 0.5, 0.9];
    let x = Matrix::from_fn(6, 1, |i, _| xs[i]);
    let y = Matrix::from_fn(6, 1, |i, _| xs[i] * xs[i]);
    let cfg = HmcConfig { kept_samples: 1000, thinning: 2, ..HmcConfig::default() };
    let post = hmc_sample(&spec, &x, &y, &cfg, &mut rng_from_seed(11)).unwrap();
    let q = Matrix::from_rows(&[vec![-0.6], vec![0.6]]);
    let outs = post.member_outputs(&q).unwrap();
    let diffs: Vec<ParamVector> = outs.iter().map(|o| ParamVector(vec![o[(0, 0)] - o[(1, 0)]])).collect();
    let (mean, _, se) = chain_stats(&diffs, 0);
    assert!(mean.abs() < 3.0 * se + 1e-9, "asymmetry {mean} (se {se})");
}

fn branin(x1: f64, x2: f64) -> f64 {
    let (a, b, c) = (1.0, 5.1 / (4.0 * std::f64::consts::PI.powi(2)), 5.0 / std::f64::consts::PI);
    let (r, s, t) = (6.0, 10.0, 1.0 / (8.0 * std::f64::consts::PI));
    let u = 15.0 * x1 - 5.0;
    let v = 15.0 * x2;
    a * (v - b * u * u + c * u - r).powi(2) + s * (1.0 - t) * u.cos() + s
}

fn standardize(y: &mut Matrix) {
    for k in 0..y.cols() {
        let col = y.column(k);
        let mean = col.iter().sum::<f64>() / col.len() as f64;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (col.len() - 1) as f64).sqrt();
        for i in 0..y.rows() {
            y[(i, k)] = (y[(i, k)] - mean) / sd;
        }
    }
}

#[test]
fn step_size_adaptation_hits_target_on_branin() {
    let mut rng = rng_from_seed(12);
    let x = Matrix::from_fn(20, 2, |_, _| rng.random::<f64>());
    let mut y = Matrix::from_fn(20, 1, |i, _| -branin(x[(i, 0)], x[(i, 1)]));
    standardize(&mut y);
    let spec = MlpSpec::new(2, vec![32, 32], 1, Activation::Tanh).with_variances(10.0, 0.1);
    let post = hmc_sample(&spec, &x, &y, &HmcConfig::default(), &mut rng).unwrap();
    let rate = post.diagnostics.accept_rate;
    assert!((0.60..=0.90).contains(&rate), "accept rate {rate}");
}

#[test]
fn leapfrog_error_shrinks_with_step() {
    let spec = MlpSpec::new(2, vec![16], 1, Activation::Tanh).with_variances(1.0, 0.1);
    let (x, y) = linear_problem(15, 2, 0.1, 6);
    let mut rng = rng_from_seed(13);
    let mut coarse = Vec::new();
    let mut fine = Vec::new();
    for _ in 0..15 {
        let theta = mlp_init(&spec, &mut rng);
        let p: Vec<f64> = (0..theta.len()).map(|_| standard_normal(&mut rng)).collect();
        coarse.push(hamiltonian_error(&spec, &x, &y, &theta, &p, 0.02, 10).unwrap().abs());
        fine.push(hamiltonian_error(&spec, &x, &y, &theta, &p, 0.002, 100).unwrap().abs());
    }
    coarse.sort_by(f64::total_cmp);
    fine.sort_by(f64::total_cmp);
    assert!(fine[7] < coarse[7], "{} vs {}", fine[7], coarse[7]);
}

#[test]
fn hmc_checkpoint_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("chain.bin");
    let spec = linear_spec(1);
    let (x, y) = linear_problem(5, 1, 0.5, 8);
    let cfg = HmcConfig { burn_in: 10, kept_samples: 5, checkpoint: Some(path.clone()), ..HmcConfig::default() };
    let post = hmc_sample(&spec, &x, &y, &cfg, &mut rng_from_seed(1)).unwrap();
    let back = read_params(std::fs::File::open(path).unwrap(), &spec).unwrap();
    assert_eq!(back, post.samples);
}

#[test]
fn single_member_ensemble_is_map() {
    let spec = MlpSpec::new(2, vec![5], 1, Activation::Tanh);
    let (x, y) = linear_problem(10, 2, 0.1, 9);
    let cfg = EnsembleConfig { n_models: 1, subset_fraction: 1.0, iterations: 200, ..EnsembleConfig::default() };
    let post = ensemble_fit(&spec, &x, &y, &cfg, &mut rng_from_seed(3)).unwrap();
    // Members draw their own seed, subset and prior initialization in that order.
    let seed = rand::RngCore::next_u64(&mut rng_from_seed(3));
    let mut member = rng_from_seed(seed);
    let _ = rand::seq::index::sample(&mut member, 10, 10);
    let init = mlp_init(&spec, &mut member);
    let direct = map_fit(&spec, &x, &y, init, &MapConfig { iterations: 200, learning_rate: 1e-2 }).unwrap();
    assert_eq!(post.samples, vec![direct]);
}

#[test]
fn ensemble_members_differ() {
    let spec = MlpSpec::new(2, vec![5], 1, Activation::Tanh);
    let (x, y) = linear_problem(10, 2, 0.1, 9);
    let cfg = EnsembleConfig { n_models: 4, iterations: 50, ..EnsembleConfig::default() };
    let post = ensemble_fit(&spec, &x, &y, &cfg, &mut rng_from_seed(3)).unwrap();
    for i in 0..4 {
        for j in 0..i {
            let d: f64 = post.samples[i].iter().zip(post.samples[j].iter()).map(|(a, b)| (a - b).powi(2)).sum();
            assert!(d > 0.0);
        }
    }
}

#[test]
fn lla_is_exact_for_linear_networks() {
    let spec = linear_spec(3);
    let (x, y) = linear_problem(12, 3, 0.5, 14);
    let truth = conjugate(&x, y.as_slice(), 0.5, 1.0);
    let state = lla_fit(&spec, &x, &y, &LlaConfig::default(), &mut rng_from_seed(1)).unwrap();
    let mut rng = rng_from_seed(2);
    let xq = Matrix::from_fn(5, 3, |_, _| 2.0 * rng.random::<f64>() - 1.0);
    let (mean, cov) = state.predict(&xq, 0).unwrap();
    let phi = design(&xq);
    let expect_mean = phi.matvec(&truth.mean);
    let expect_cov = phi.matmul(&truth.cov).matmul_nt(&phi);
    for (a, b) in mean.iter().zip(&expect_mean) {
        assert!((a - b).abs() < 1e-6, "{a} vs {b}");
    }
    assert!(cov.max_abs_diff(&expect_cov) < 1e-6);
}

#[test]
fn lla_variance_contracts_at_data() {
    let spec = MlpSpec::new(1, vec![16, 16], 1, Activation::Tanh).with_variances(1.0, 0.01);
    let x = Matrix::from_rows(&[vec![-1.0], vec![-0.8], vec![0.9], vec![1.1]]);
    let y = Matrix::from_rows(&[vec![0.5], vec![0.4], vec![-0.2], vec![-0.4]]);
    let state = lla_fit(&spec, &x, &y, &LlaConfig::default(), &mut rng_from_seed(5)).unwrap();
    let (_, at_data) = state.predict(&Matrix::from_rows(&[vec![0.9]]), 0).unwrap();
    let (_, far) = state.predict(&Matrix::from_rows(&[vec![0.0]]), 0).unwrap();
    assert!(at_data[(0, 0)] >= 0.0 && far[(0, 0)] >= 0.0);
    assert!(at_data[(0, 0)] <= far[(0, 0)], "{} vs {}", at_data[(0, 0)], far[(0, 0)]);
}

fn constant_posterior(values: &[f64], noise: f64) -> WeightPosterior {
    let spec = MlpSpec::new(1, vec![3], 1, Activation::Tanh).with_variances(1.0, noise);
    let p = spec.num_params();
    let samples = values
        .iter()
        .map(|&c| {
            let mut v = vec![0.0; p];
            v[p - 1] = c;
            ParamVector(v)
        })
        .collect();
    WeightPosterior::new(spec, samples, SamplerDiagnostics::default()).unwrap()
}

#[test]
fn predictive_draw_moments() {
    let xq = Matrix::from_rows(&[vec![0.1], vec![0.8]]);
    let single = constant_posterior(&[1.5], 0.2);
    let d = predictive_draws(&single, &xq, 20, false, &mut rng_from_seed(0)).unwrap();
    assert!(d.as_slice().iter().all(|&v| v == 1.5));

    let noisy = predictive_draws(&single, &xq, 50_000, true, &mut rng_from_seed(1)).unwrap();
    let col = noisy.objective(0).column(0);
    let mean = col.iter().sum::<f64>() / col.len() as f64;
    let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (col.len() - 1) as f64;
    assert!((var / 0.2 - 1.0).abs() < 0.03, "{var}");

    let mix = constant_posterior(&[-1.0, 0.0, 4.0], 0.2);
    let draws = predictive_draws(&mix, &xq, 60_000, false, &mut rng_from_seed(2)).unwrap();
    assert!((draws.mean()[(0, 0)] - 1.0).abs() < 0.05);
}

fn dtlz1(x: &[f64]) -> [f64; 2] {
    let k = x.len() - 1;
    let g = 100.0
        * (k as f64
            + x[1..]
                .iter()
                .map(|v| (v - 0.5).powi(2) - (20.0 * std::f64::consts::PI * (v - 0.5)).cos())
                .sum::<f64>());
    [0.5 * x[0] * (1.0 + g), 0.5 * (1.0 - x[0]) * (1.0 + g)]
}

fn dtlz1_data(n: usize, rng: &mut Rng) -> (Matrix, Matrix) {
    let x = Matrix::from_fn(n, 5, |_, _| rng.random::<f64>());
    let mut y = Matrix::from_fn(n, 2, |i, k| -dtlz1(x.row(i))[k]);
    standardize(&mut y);
    (x, y)
}

#[test]
fn independent_minima_are_separated_by_a_barrier() {
    let mut rng = rng_from_seed(15);
    let (x, y) = dtlz1_data(100, &mut rng);
    let spec = MlpSpec::new(5, vec![64, 64], 2, Activation::Tanh).with_variances(10.0, 0.1);
    let cfg = MapConfig::default();
    let a = map_fit(&spec, &x, &y, mlp_init(&spec, &mut rng), &cfg).unwrap();
    let b = map_fit(&spec, &x, &y, mlp_init(&spec, &mut rng), &cfg).unwrap();
    let curve = interpolate_loss(&spec, &a, &b, &x, &y, 21, (-0.5, 1.5)).unwrap();
    let ends = curve[5].1.max(curve[15].1);
    let peak = curve[5..=15].iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    assert!(peak >= ends, "path max {peak} below endpoint loss {ends}");
    let _ = mlp_forward(&spec, &a, &x).unwrap();
}
