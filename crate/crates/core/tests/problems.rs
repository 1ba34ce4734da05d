use bnnbo_core::mlp::mlp_forward;
use bnnbo_core::numkit::{rng_from_seed, Matrix, Rng};
use bnnbo_core::problems::{
    branin, build_problem, derive_reference, dtlz1, hartmann6, nonstationary_1d, NnDrawProblem, PolynomialProblem,
    Problem, ProblemConfig, ProblemRegistry, BRANIN_MAX, HARTMANN6_MAX,
};
use bnnbo_core::Error;
use rand::Rng as _;

fn problem(name: &str) -> Box<dyn Problem> {
    build_problem(&ProblemConfig::named(name)).unwrap()
}

fn random_point(p: &dyn Problem, rng: &mut Rng) -> Vec<f64> {
    p.info().bounds.iter().map(|&(lo, hi)| lo + (hi - lo) * rng.random::<f64>()).collect()
}

/// Compass search: shrinks the step whenever no axis move improves.
fn local_max(f: &dyn Fn(&[f64]) -> f64, mut x: Vec<f64>, bounds: &[(f64, f64)], mut step: f64) -> (Vec<f64>, f64) {
    let mut best = f(&x);
    while step > 1e-10 {
        let mut moved = false;
        for j in 0..x.len() {
            for dir in [-1.0, 1.0] {
                let mut y = x.clone();
                y[j] = (y[j] + dir * step * (bounds[j].1 - bounds[j].0)).clamp(bounds[j].0, bounds[j].1);
                let v = f(&y);
                if v > best {
                    best = v;
                    x = y;
                    moved = true;
                }
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    (x, best)
}

#[test]
fn registry_names() {
    let names = ProblemRegistry::global().names();
    for n in ["ackley", "branin", "branin_currin", "currin", "dtlz1", "dtlz5", "hartmann6", "nn_draw", "nonstationary_1d", "polynomial"] {
        assert!(names.contains(&n), "{n}");
    }
    assert!(matches!(build_problem(&ProblemConfig::named("rosenbrock")), Err(Error::UnknownName { .. })));
}

#[test]
fn ackley_peaks_at_origin() {
    let p = problem("ackley");
    assert_eq!(p.evaluate(&[0.0; 10]).unwrap(), vec![0.0]);
    assert_eq!(p.info().known_best, Some(0.0));
}

#[test]
fn branin_maximum_by_grid_and_refinement() {
    let p = problem("branin");
    let b = p.info().bounds.clone();
    let n = 1500;
    let mut best = (f64::NEG_INFINITY, vec![0.0, 0.0]);
    for i in 0..=n {
        for j in 0..=n {
            let x = vec![b[0].0 + 15.0 * i as f64 / n as f64, b[1].0 + 15.0 * j as f64 / n as f64];
            let v = -branin(x[0], x[1]);
            if v > best.0 {
                best = (v, x);
            }
        }
    }
    let f = |x: &[f64]| -branin(x[0], x[1]);
    let (x, v) = local_max(&f, best.1, &b, 1e-3);
    assert!((v - (-0.397887)).abs() < 1e-4 && (v - BRANIN_MAX).abs() < 1e-9, "{v}");
    let minima = [(-std::f64::consts::PI, 12.275), (std::f64::consts::PI, 2.275), (9.42478, 2.475)];
    assert!(minima.iter().any(|m| (x[0] - m.0).abs() < 1e-3 && (x[1] - m.1).abs() < 1e-3), "{x:?}");
    let at = p.evaluate(&[std::f64::consts::PI, 2.275]).unwrap()[0];
    assert!((at - (-0.397887)).abs() < 1e-4);
}

#[test]
fn hartmann_maximum_by_multistart() {
    let mut rng = rng_from_seed(1);
    let bounds = vec![(0.0, 1.0); 6];
    let f = |x: &[f64]| -hartmann6(x);
    let best = (0..40)
        .map(|_| local_max(&f, (0..6).map(|_| rng.random::<f64>()).collect(), &bounds, 0.1).1)
        .fold(f64::NEG_INFINITY, f64::max);
    assert!((best - 3.32237).abs() < 1e-4, "{best}");
    assert!((best - HARTMANN6_MAX).abs() < 1e-9);
}

/// Textbook DTLZ1, written independently of the library.
fn dtlz1_reference(x: &[f64], m: usize) -> Vec<f64> {
    let n = x.len();
    let k = n - m + 1;
    let mut g = k as f64;
    for xi in &x[n - k..] {
        g += (xi - 0.5) * (xi - 0.5) - (20.0 * std::f64::consts::PI * (xi - 0.5)).cos();
    }
    g *= 100.0;
    let mut f = vec![0.0; m];
    for (i, fi) in f.iter_mut().enumerate() {
        let mut v = 0.5 * (1.0 + g);
        for xj in x.iter().take(m - 1 - i) {
            v *= xj;
        }
        if i != 0 {
            v *= 1.0 - x[m - 1 - i];
        }
        *fi = v;
    }
    f
}

#[test]
fn dtlz1_front_and_independent_formula() {
    let mut rng = rng_from_seed(2);
    for m in [2, 3] {
        for _ in 0..50 {
            let mut x: Vec<f64> = (0..7).map(|_| rng.random::<f64>()).collect();
            let f = dtlz1(&x, m);
            let g = dtlz1_reference(&x, m);
            assert!(f.iter().zip(&g).all(|(a, b)| (a - b).abs() <= 1e-12 * b.abs().max(1.0)));
            x[m - 1..].iter_mut().for_each(|v| *v = 0.5);
            assert!((dtlz1(&x, m).iter().sum::<f64>() - 0.5).abs() < 1e-12);
        }
    }
    let p = problem("dtlz1");
    let y = p.evaluate(&[0.3, 0.5, 0.5, 0.5, 0.5]).unwrap();
    assert!((y.iter().sum::<f64>() + 0.5).abs() < 1e-12);
}

#[test]
fn polynomial_hand_expansion() {
    let mut zero = PolynomialProblem::new(8, 0).unwrap();
    zero.coefficients.iter_mut().for_each(|c| *c = 0.0);
    assert_eq!(zero.evaluate(&[0.0; 8]).unwrap(), vec![0.0]);

    let p = PolynomialProblem::new(4, 3).unwrap();
    let c = p.coefficients.clone();
    let mut rng = rng_from_seed(4);
    for _ in 0..20 {
        let x: Vec<f64> = (0..4).map(|_| rng.random::<f64>()).collect();
        let mut expanded = 0.0;
        for mask in 0u32..16 {
            let term: f64 = (0..4).map(|j| if mask & (1 << j) != 0 { x[j] } else { -c[j] }).product();
            expanded += term;
        }
        assert!((p.evaluate(&x).unwrap()[0] - expanded).abs() < 1e-12);
    }
    assert_eq!(PolynomialProblem::new(4, 3).unwrap().coefficients, c);
    assert_ne!(PolynomialProblem::new(4, 5).unwrap().coefficients, c);
    assert!(matches!(PolynomialProblem::new(6, 0), Err(Error::BadDimension(_))));
}

#[test]
fn nn_draw_is_frozen_and_bounded() {
    let p = NnDrawProblem::new(10, vec![256, 256], 7).unwrap();
    let mut rng = rng_from_seed(8);
    let x: Vec<f64> = (0..10).map(|_| rng.random::<f64>()).collect();
    assert_eq!(p.evaluate(&x).unwrap(), p.evaluate(&x).unwrap());
    assert_eq!(NnDrawProblem::new(10, vec![256, 256], 7).unwrap().evaluate(&x).unwrap(), p.evaluate(&x).unwrap());
    let last = p.spec.layers().pop().unwrap();
    let w_l1: f64 = p.params[last.weight_range()].iter().map(|w| w.abs()).sum();
    let bound = w_l1 + p.params[last.bias_range()][0].abs();
    for _ in 0..200 {
        let x: Vec<f64> = (0..10).map(|_| rng.random::<f64>()).collect();
        assert!(p.evaluate(&x).unwrap()[0].abs() <= bound);
    }
}

#[test]
fn nn_draw_scale_is_order_one() {
    let mut rng = rng_from_seed(9);
    let x = Matrix::from_fn(10_000, 100, |_, _| rng.random::<f64>());
    for seed in 0..30 {
        let p = NnDrawProblem::new(100, vec![256, 256], seed).unwrap();
        let y = mlp_forward(&p.spec, &p.params, &x).unwrap().into_vec();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        let sd = (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (y.len() - 1) as f64).sqrt();
        assert!((0.1..=100.0).contains(&sd), "seed {seed}: sd {sd}");
    }
}

#[test]
fn nonstationary_toy_structure() {
    let detrended = |lo: f64, hi: f64| {
        let v: Vec<f64> = (0..=4000).map(|i| lo + (hi - lo) * i as f64 / 4000.0).map(|x| nonstationary_1d(x) + 0.05 * x).collect();
        v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let (inside, outside) = (detrended(-2.0, 2.0), detrended(2.01, 6.0).max(detrended(-6.0, -2.01)));
    assert!(inside / outside > 5.0, "{inside} / {outside}");
    let grid: Vec<f64> = (0..=100_000).map(|i| -6.0 + 12.0 * i as f64 / 100_000.0).collect();
    let argmax = grid.iter().copied().max_by(|a, b| nonstationary_1d(*a).total_cmp(&nonstationary_1d(*b))).unwrap();
    assert!(argmax.abs() <= 2.0, "{argmax}");
    let envelope = |c: f64| (0..1000).map(|i| nonstationary_1d(c - 0.5 + i as f64 / 1000.0)).sum::<f64>() / 1000.0;
    assert!(envelope(-5.5) > envelope(5.5));
}

#[test]
fn bounds_and_dimensions_are_enforced() {
    let p = problem("branin");
    assert!(matches!(p.evaluate(&[11.0, 1.0]), Err(Error::OutOfBounds { dim: 0, .. })));
    assert!(matches!(p.evaluate(&[1.0]), Err(Error::BadDimension(_))));
    let mut cfg = ProblemConfig::named("hartmann6");
    cfg.dim = Some(5);
    assert!(build_problem(&cfg).is_err());
    let mut narrow = ProblemConfig::named("ackley");
    narrow.domain = Some("narrow".into());
    narrow.dim = Some(4);
    assert_eq!(build_problem(&narrow).unwrap().info().bounds, vec![(-5.0, 10.0); 4]);
}

fn every_problem() -> Vec<Box<dyn Problem>> {
    ProblemRegistry::global().names().into_iter().map(problem).collect()
}

#[test]
fn million_evaluations_are_finite() {
    let mut rng = rng_from_seed(10);
    for p in every_problem() {
        let d = p.info().dim();
        if p.info().name == "nn_draw" {
            let nn = NnDrawProblem::new(d, vec![256, 256], 0).unwrap();
            for _ in 0..100 {
                let x = Matrix::from_fn(10_000, d, |_, _| rng.random::<f64>());
                assert!(mlp_forward(&nn.spec, &nn.params, &x).unwrap().all_finite());
            }
            continue;
        }
        for _ in 0..1_000_000 {
            let x = random_point(p.as_ref(), &mut rng);
            assert!(p.evaluate(&x).is_ok(), "{} at {x:?}", p.info().name);
        }
    }
}

#[test]
fn known_best_is_never_beaten() {
    let mut rng = rng_from_seed(11);
    for name in ["branin", "hartmann6", "ackley"] {
        let p = problem(name);
        let best = p.info().known_best.unwrap();
        for _ in 0..1_000_000 {
            let x = random_point(p.as_ref(), &mut rng);
            assert!(p.value(&x)[0] <= best + 1e-6, "{name} at {x:?}");
        }
    }
}

#[test]
fn reference_points_are_frozen_derivations_and_attainable() {
    let mut rng = rng_from_seed(12);
    for name in ["branin_currin", "dtlz1", "dtlz5"] {
        let p = problem(name);
        let r = p.info().reference.clone().unwrap();
        assert_eq!(r.len(), p.info().objectives);
        let derived = derive_reference(p.as_ref(), 10_000);
        assert!(r.iter().zip(&derived).all(|(a, b)| (a - b).abs() <= 1e-9 * b.abs()), "{name}: {r:?} vs {derived:?}");
        let hit = (0..10_000).any(|_| {
            let y = p.value(&random_point(p.as_ref(), &mut rng));
            y.iter().zip(&r).all(|(a, b)| a > b)
        });
        assert!(hit, "{name}");
    }
}
