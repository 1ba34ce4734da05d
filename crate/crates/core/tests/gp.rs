use bnnbo_core::gp::{
    dkl_fit, dkl_objective, feature_spec, gp_fit, matern52, matern_objective, nngp_kernel, DklConfig, GpOptConfig,
    GpPriorConfig, GpState, IbnnKernelSpec, Kernel, KernelChoice, Matern52Hypers, MaternLayout,
};
use bnnbo_core::mlp::{mlp_init, Activation, MlpSpec};
use bnnbo_core::numkit::{cholesky, finite_diff_grad, mvn_sample, rng_from_seed, Matrix, Rng};
use proptest::prelude::*;
use rand::Rng as _;

fn uniform(rows: usize, cols: usize, rng: &mut Rng) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| rng.random::<f64>())
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    diff / b.iter().map(|y| y * y).sum::<f64>().sqrt().max(1e-12)
}

/// Gauss-Jordan inverse with partial pivoting, independent of the Cholesky path.
fn gauss_jordan_inverse(a: &Matrix) -> Matrix {
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

/// Conditions the joint Gaussian over (train, query) directly.
fn brute_force_conditioning(kernel: &Kernel, noise: f64, x: &Matrix, y: &[f64], xq: &Matrix) -> (Vec<f64>, Matrix) {
    let n = x.rows();
    let q = xq.rows();
    let all = x.vstack(xq);
    let joint = Matrix::from_fn(n + q, n + q, |i, j| kernel.eval(all.row(i), all.row(j)) + if i == j && i < n { noise } else { 0.0 });
    let kxx = Matrix::from_fn(n, n, |i, j| joint[(i, j)]);
    let kqx = Matrix::from_fn(q, n, |i, j| joint[(n + i, j)]);
    let kqq = Matrix::from_fn(q, q, |i, j| joint[(n + i, n + j)]);
    let inv = gauss_jordan_inverse(&kxx);
    let w = kqx.matmul(&inv);
    let mean = w.matvec(y);
    let cov = kqq.sub(&w.matmul_nt(&kqx));
    (mean, cov)
}

#[test]
fn mll_gradient_matches_finite_differences() {
    let mut rng = rng_from_seed(1);
    let prior = GpPriorConfig::default();
    for fixture in 0..12 {
        let d = 1 + fixture % 3;
        let x = uniform(15, d, &mut rng);
        let y: Vec<f64> = (0..15).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let layout = MaternLayout { lengthscales: if fixture % 2 == 0 { 1 } else { d }, noise_floor: 1e-6 };
        let theta: Vec<f64> = (0..layout.len()).map(|_| rng.random::<f64>() * 2.0 - 1.5).collect();
        let v = matern_objective(&x, &y, &theta, layout, &prior, false).unwrap();
        let fd = finite_diff_grad(|t| matern_objective(&x, &y, t, layout, &prior, false).unwrap().objective, &theta, 1e-5).unwrap();
        let err = rel_err(&v.grad, &fd);
        assert!(err < 1e-4, "fixture {fixture}: {err}");
    }
}

#[test]
fn two_point_mll_matches_bivariate_density() {
    let h = Matern52Hypers::shared(0.4, 1.7);
    let x = Matrix::from_rows(&[vec![0.2], vec![0.5]]);
    let y = vec![0.3, -0.8];
    let noise = 0.05;
    let s = GpState::condition(Kernel::Matern52(h.clone()), noise, x.clone(), y.clone()).unwrap();
    let a = matern52(x.row(0), x.row(0), &h) + noise;
    let b = matern52(x.row(0), x.row(1), &h);
    let c = matern52(x.row(1), x.row(1), &h) + noise;
    let det = a * c - b * b;
    let quad = (c * y[0] * y[0] - 2.0 * b * y[0] * y[1] + a * y[1] * y[1]) / det;
    let expect = -0.5 * quad - 0.5 * det.ln() - (2.0 * std::f64::consts::PI).ln();
    assert!((s.mll() - expect).abs() < 1e-12, "{} vs {expect}", s.mll());
}

#[test]
fn mll_invariant_to_ordering() {
    let mut rng = rng_from_seed(3);
    let x = uniform(12, 2, &mut rng);
    let y: Vec<f64> = (0..12).map(|_| rng.random::<f64>()).collect();
    let perm: Vec<usize> = (0..12).rev().collect();
    let k = Kernel::Nngp(IbnnKernelSpec::default());
    let a = GpState::condition(k.clone(), 0.01, x.clone(), y.clone()).unwrap().mll();
    let b = GpState::condition(k, 0.01, x.select_rows(&perm), perm.iter().map(|&i| y[i]).collect()).unwrap().mll();
    assert!((a - b).abs() < 1e-9 * a.abs());
}

#[test]
fn predict_matches_partitioned_gaussian() {
    let mut rng = rng_from_seed(4);
    let kernels = [
        Kernel::Matern52(Matern52Hypers::shared(0.3, 1.2)),
        Kernel::Matern52(Matern52Hypers { lengthscales: vec![0.2, 0.7], outputscale: 0.8 }),
        Kernel::Nngp(IbnnKernelSpec::default()),
    ];
    for kernel in &kernels {
        for (n, q) in [(3, 2), (5, 3), (1, 1), (6, 2)] {
            let x = uniform(n, 2, &mut rng);
            let y: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
            let xq = uniform(q, 2, &mut rng);
            let s = GpState::condition(kernel.clone(), 0.02, x.clone(), y.clone()).unwrap();
            let (mean, cov) = s.predict(&xq).unwrap();
            let (m2, c2) = brute_force_conditioning(kernel, 0.02, &x, &y, &xq);
            let scale = kernel.eval(xq.row(0), xq.row(0));
            for (a, b) in mean.iter().zip(&m2) {
                assert!((a - b).abs() < 1e-8 * scale.max(1.0));
            }
            assert!(cov.max_abs_diff(&c2) < 1e-8 * scale.max(1.0));
        }
    }
}

#[test]
fn interpolation_and_prior_reversion() {
    let h = Matern52Hypers::shared(0.1, 2.0);
    let x = Matrix::from_rows(&[vec![0.1], vec![0.6]]);
    let s = GpState::condition(Kernel::Matern52(h), 1e-12, x.clone(), vec![1.5, -0.5]).unwrap();
    let (m, c) = s.predict(&x).unwrap();
    assert!((m[0] - 1.5).abs() < 1e-6 && (m[1] + 0.5).abs() < 1e-6);
    assert!(c[(0, 0)].abs() < 1e-6);
    let far = Matrix::from_rows(&[vec![50.0]]);
    let (m, c) = s.predict(&far).unwrap();
    assert!(m[0].abs() < 1e-12 && (c[(0, 0)] - 2.0).abs() < 1e-12);
    let draws = s.sample(&x, 20, &mut rng_from_seed(0)).unwrap();
    assert!(draws.row_iter().all(|r| (r[0] - 1.5).abs() < 1e-3));
}

#[test]
fn sample_moments_and_reproducibility() {
    let mut rng = rng_from_seed(5);
    let x = uniform(6, 1, &mut rng);
    let y: Vec<f64> = (0..6).map(|_| rng.random::<f64>()).collect();
    let s = GpState::condition(Kernel::Matern52(Matern52Hypers::shared(0.3, 1.0)), 0.01, x, y).unwrap();
    let xq = Matrix::from_rows(&[vec![0.05], vec![0.5], vec![0.95]]);
    let (mean, cov) = s.predict(&xq).unwrap();
    let count = 50_000;
    let draws = s.sample(&xq, count, &mut rng_from_seed(9)).unwrap();
    for i in 0..3 {
        let mi = draws.column(i).iter().sum::<f64>() / count as f64;
        assert!((mi - mean[i]).abs() < 4.0 * (cov[(i, i)] / count as f64).sqrt() + 1e-12);
        for j in 0..3 {
            let mj = draws.column(j).iter().sum::<f64>() / count as f64;
            let cij = draws.row_iter().map(|r| (r[i] - mi) * (r[j] - mj)).sum::<f64>() / (count - 1) as f64;
            let se = ((cov[(i, i)] * cov[(j, j)] + cov[(i, j)].powi(2)) / count as f64).sqrt();
            assert!((cij - cov[(i, j)]).abs() < 5.0 * se, "{i},{j}: {cij} vs {}", cov[(i, j)]);
        }
    }
    let again = s.sample(&xq, 10, &mut rng_from_seed(9)).unwrap();
    assert_eq!(again.row(3), draws.row(3));
}

#[test]
fn recovers_lengthscale_from_matern_draws() {
    let mut ls = Vec::new();
    for seed in 0..10 {
        let mut rng = rng_from_seed(100 + seed);
        let x = uniform(200, 1, &mut rng);
        let h = Matern52Hypers::shared(0.2, 1.0);
        let mut k = Kernel::Matern52(h).gram(&x);
        k.add_diag(1e-4);
        let chol = cholesky(&k, 0.0).unwrap();
        let f = mvn_sample(&vec![0.0; 200], &chol.factor, 1, &mut rng).unwrap();
        let s = gp_fit(&KernelChoice::Matern52, &x, f.row(0), &GpPriorConfig::default(), &GpOptConfig::default(), &mut rng)
            .unwrap();
        let Kernel::Matern52(fitted) = s.kernel() else { unreachable!() };
        ls.push(fitted.lengthscales[0]);
    }
    ls.sort_by(f64::total_cmp);
    let median = 0.5 * (ls[4] + ls[5]);
    assert!((0.1..=0.4).contains(&median), "{ls:?}");
}

#[test]
fn matern_mean_is_translation_invariant() {
    let mut rng = rng_from_seed(6);
    let x = uniform(8, 2, &mut rng);
    let y: Vec<f64> = (0..8).map(|_| rng.random::<f64>()).collect();
    let xq = uniform(4, 2, &mut rng);
    let shift = |m: &Matrix| Matrix::from_fn(m.rows(), 2, |i, j| m[(i, j)] + [3.0, -1.5][j]);
    let k = Kernel::Matern52(Matern52Hypers::shared(0.4, 1.0));
    let a = GpState::condition(k.clone(), 0.01, x.clone(), y.clone()).unwrap().predict(&xq).unwrap().0;
    let b = GpState::condition(k, 0.01, shift(&x), y).unwrap().predict(&shift(&xq)).unwrap().0;
    assert!(rel_err(&a, &b) < 1e-10);
}

#[test]
fn nngp_is_symmetric_and_rotation_invariant() {
    let mut rng = rng_from_seed(7);
    let spec = IbnnKernelSpec::default();
    for _ in 0..20 {
        let a: Vec<f64> = (0..3).map(|_| rng.random::<f64>() - 0.5).collect();
        let b: Vec<f64> = (0..3).map(|_| rng.random::<f64>() - 0.5).collect();
        assert_eq!(nngp_kernel(&a, &b, &spec), nngp_kernel(&b, &a, &spec));
        // Random rotation from Gram-Schmidt.
        let g = uniform(3, 3, &mut rng);
        let mut q: Vec<Vec<f64>> = Vec::new();
        for i in 0..3 {
            let mut v = g.row(i).to_vec();
            for u in &q {
                let p: f64 = v.iter().zip(u).map(|(x, y)| x * y).sum();
                v.iter_mut().zip(u).for_each(|(x, y)| *x -= p * y);
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            q.push(v.into_iter().map(|x| x / norm).collect());
        }
        let rot = |v: &[f64]| q.iter().map(|r| r.iter().zip(v).map(|(x, y)| x * y).sum()).collect::<Vec<f64>>();
        let base = nngp_kernel(&a, &b, &spec);
        assert!((nngp_kernel(&rot(&a), &rot(&b), &spec) - base).abs() < 1e-10 * base.abs().max(1.0));
    }
}

#[test]
fn dkl_gradient_matches_finite_differences() {
    let mut rng = rng_from_seed(8);
    let prior = GpPriorConfig::default();
    for fixture in 0..10 {
        let spec = MlpSpec::new(2, vec![4, 3], 1, Activation::Tanh);
        let features = feature_spec(&spec).unwrap();
        let x = uniform(5, 2, &mut rng);
        let y: Vec<f64> = (0..5).map(|_| rng.random::<f64>() - 0.5).collect();
        let mut theta = mlp_init(&features, &mut rng).into_vec();
        theta.extend([rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, -2.0 - rng.random::<f64>()]);
        let (_, grad) = dkl_objective(&features, &theta, &x, &y, &prior, 1e-6).unwrap();
        let fd = finite_diff_grad(|t| dkl_objective(&features, t, &x, &y, &prior, 1e-6).unwrap().0, &theta, 1e-5).unwrap();
        let err = rel_err(&grad, &fd);
        assert!(err < 1e-4, "fixture {fixture}: {err}");
    }
}

#[test]
fn dkl_is_deterministic_and_competitive() {
    let mut rng = rng_from_seed(10);
    let x = uniform(30, 1, &mut rng);
    let y: Vec<f64> = x.row_iter().map(|r| (6.0 * r[0]).sin()).collect();
    let mean = y.iter().sum::<f64>() / 30.0;
    let sd = (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 29.0).sqrt();
    let y: Vec<f64> = y.iter().map(|v| (v - mean) / sd).collect();
    let spec = MlpSpec::new(1, vec![16, 16], 1, Activation::Tanh).with_variances(1.0, 1.0);
    let cfg = DklConfig::default();
    let a = dkl_fit(&spec, &x, &y, &GpPriorConfig::default(), &cfg, &mut rng_from_seed(1)).unwrap();
    let b = dkl_fit(&spec, &x, &y, &GpPriorConfig::default(), &cfg, &mut rng_from_seed(1)).unwrap();
    assert_eq!(a.params, b.params);
    let gp = gp_fit(&KernelChoice::Matern52, &x, &y, &GpPriorConfig::default(), &GpOptConfig::default(), &mut rng_from_seed(1))
        .unwrap();
    assert!(a.gp.mll() >= gp.mll() - 1.0, "dkl {} vs gp {}", a.gp.mll(), gp.mll());
}

proptest! {
    #[test]
    fn kernel_matrices_factor(n in 1usize..25, d in 1usize..5, seed in any::<u64>()) {
        let x = uniform(n, d, &mut rng_from_seed(seed));
        for k in [
            Kernel::Matern52(Matern52Hypers::shared(0.3, 1.0)),
            Kernel::Nngp(IbnnKernelSpec::default()),
            Kernel::Linear { variance: 2.0 },
        ] {
            prop_assert!(cholesky(&k.gram(&x), 0.0).is_ok());
        }
    }
}
