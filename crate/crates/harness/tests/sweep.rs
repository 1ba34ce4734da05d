use bnnbo_core::bnn::HmcConfig;
use bnnbo_harness::config::{SweepConfig, SweepGroup};
use bnnbo_harness::sweep::{between_mask, cells, toy_1d, TOY_POINTS};
use bnnbo_harness::{sensitivity_sweep, write_sweep, SweepResult};

fn light_hmc() -> HmcConfig {
    HmcConfig { burn_in: 50, kept_samples: 20, ..HmcConfig::default() }
}

#[test]
fn cells_vary_one_factor_at_a_time() {
    let cfg = SweepConfig::from_toml_str("").unwrap();
    let all = cells(&cfg);
    assert_eq!(all.len(), 3 + 3 + 4 + 3 + 2);
    let base = &cfg.surrogate.network;
    for cell in &all {
        let net = &cell.surrogate.network;
        let changed = [
            net.likelihood_variance != base.likelihood_variance,
            net.prior_variance != base.prior_variance,
            net.hidden_widths.len() != base.hidden_widths.len(),
            net.hidden_widths.first() != base.hidden_widths.first(),
            net.activation != base.activation,
        ];
        assert!(changed.iter().filter(|c| **c).count() <= 1, "{} = {}", cell.group.name(), cell.value);
    }
    let depth4 = all.iter().find(|c| c.group == SweepGroup::Depth && c.value == "4").unwrap();
    assert_eq!(depth4.surrogate.network.hidden_widths, vec![base.hidden_widths[0]; 4]);
}

#[test]
fn between_mask_skips_data_neighbourhoods() {
    let grid: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
    let mask = between_mask(&grid, &TOY_POINTS);
    assert!(mask.iter().any(|m| *m));
    for (x, m) in grid.iter().zip(&mask) {
        let outside = *x < TOY_POINTS[0] || *x > TOY_POINTS[3];
        if outside {
            assert!(!m);
        }
        if *m {
            let nearest = TOY_POINTS.iter().map(|p| (p - x).abs()).fold(f64::INFINITY, f64::min);
            assert!(nearest >= 0.0625 - 1e-12, "x = {x}");
        }
    }
    assert!((toy_1d(0.25) - (1.0 + 0.125)).abs() < 1e-12);
}

#[test]
fn one_cell_sweep_writes_one_row_group() {
    let mut cfg = SweepConfig::from_toml_str("[sweep]\ngroups = [\"depth\"]\ndepth = [2]\ngrid_points = 25\ndraws = 3\n").unwrap();
    cfg.surrogate.network.hidden_widths = vec![16, 16];
    cfg.surrogate.hmc = light_hmc();
    let result = sensitivity_sweep(&cfg).unwrap();
    assert!(result.failures().is_empty());
    let dir = tempfile::tempdir().unwrap();
    write_sweep(&result, dir.path()).unwrap();
    let curves = std::fs::read_to_string(dir.path().join("sweep_curves.csv")).unwrap();
    let lines: Vec<&str> = curves.lines().collect();
    assert_eq!(lines[0], "group,value,x,mean,std,draw_0,draw_1,draw_2");
    assert_eq!(lines.len(), 1 + 25);
    assert!(lines[1..].iter().all(|l| l.starts_with("depth,2,")));
    let summary = std::fs::read_to_string(dir.path().join("sweep_summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
    assert!(summary.lines().nth(1).unwrap().ends_with(",ok"));
}

#[test]
fn failed_cells_are_reported_and_the_sweep_continues() {
    let text = "[sweep]\ngroups = [\"width\", \"depth\"]\nwidth = [8]\ndepth = [1]\ngrid_points = 10\ndraws = 1\n";
    let mut cfg = SweepConfig::from_toml_str(text).unwrap();
    cfg.surrogate.network.hidden_widths = vec![8];
    cfg.surrogate.hmc = HmcConfig { burn_in: 0, kept_samples: 0, ..light_hmc() };
    let result = sensitivity_sweep(&cfg).unwrap();
    assert_eq!(result.failures().len(), 2);
    let dir = tempfile::tempdir().unwrap();
    write_sweep(&result, dir.path()).unwrap();
    let summary = std::fs::read_to_string(dir.path().join("sweep_summary.csv")).unwrap();
    assert_eq!(summary.lines().filter(|l| l.ends_with(",failed")).count(), 2);
}

#[test]
fn reward_sweep_reports_each_cell() {
    let text = r#"
[sweep]
mode = "reward"
groups = ["prior_variance"]
prior_variance = [0.1, 10.0]

[surrogate]
kind = "ensemble"

[surrogate.network]
hidden_widths = [8]

[problem]
name = "branin"

[run]
n_init = 4
batch = 2
max_evals = 6
trials = 2
"#;
    let mut cfg = SweepConfig::from_toml_str(text).unwrap();
    cfg.surrogate.ensemble.iterations = 30;
    cfg.surrogate.ensemble.n_models = 3;
    let result = sensitivity_sweep(&cfg).unwrap();
    let SweepResult::Reward(outcomes) = &result else { panic!("reward mode") };
    assert_eq!(outcomes.len(), 2);
    for o in outcomes {
        let cell = o.result.as_ref().unwrap();
        assert_eq!(cell.final_best.len(), 2);
        assert!(cell.mean.is_finite() && cell.stderr >= 0.0);
    }
    let dir = tempfile::tempdir().unwrap();
    write_sweep(&result, dir.path()).unwrap();
    let rewards = std::fs::read_to_string(dir.path().join("sweep_rewards.csv")).unwrap();
    assert_eq!(rewards.lines().count(), 1 + 4);
}
