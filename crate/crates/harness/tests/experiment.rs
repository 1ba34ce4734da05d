use std::path::Path;

use bnnbo_core::problems::ProblemConfig;
use bnnbo_core::surrogate::SurrogateConfig;
use bnnbo_harness::config::{BoConfig, RunConfig};
use bnnbo_harness::experiment::{trial_path, OUT_DIR_ENV};
use bnnbo_harness::{resolve_out_dir, run_experiment, run_trial, summarize, IterationRow};

fn small(trials: usize, threads: usize) -> BoConfig {
    let run = RunConfig { n_init: 5, batch: 2, max_evals: 11, trials, seed: 11, threads };
    let mut cfg = BoConfig::new(ProblemConfig::named("branin"), SurrogateConfig::of_kind("gp"), run);
    cfg.surrogate.gp.iterations = 40;
    cfg
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn writes_summary_trials_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(2, 1);
    let result = run_experiment(&cfg, dir.path()).unwrap();

    let summary = read(&dir.path().join("summary.csv"));
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "evals,mean_best,stderr_best,surrogate");
    assert_eq!(lines.len(), 1 + 11);
    assert!(!summary.contains('\r'));
    for (k, line) in lines[1..].iter().enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields[0], (k + 1).to_string());
        assert_eq!(fields[3], "gp");
    }

    for trial in 0..2 {
        let text = read(&trial_path(dir.path(), trial));
        let rows: Vec<IterationRow> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(rows, result.records[trial].rows);
        assert_eq!(rows.last().unwrap().evals, 11);
    }
    let saved = BoConfig::from_toml_str(&read(&dir.path().join("config.toml"))).unwrap();
    assert_eq!(saved, cfg);
}

#[test]
fn summary_is_mean_and_standard_error_of_traces() {
    let cfg = small(3, 1);
    let records: Vec<_> = (0..3).map(|t| run_trial(&cfg, t).unwrap()).collect();
    let rows = summarize(&records);
    assert_eq!(rows.len(), 11);
    for (e, row) in rows.iter().enumerate() {
        let v: Vec<f64> = records.iter().map(|r| r.trace[e]).collect();
        let mean = v.iter().sum::<f64>() / 3.0;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 2.0).sqrt();
        assert!((row.mean_best - mean).abs() < 1e-12);
        assert!((row.stderr_best - sd / 3f64.sqrt()).abs() < 1e-12);
    }
    assert!(rows.windows(2).all(|w| w[1].mean_best >= w[0].mean_best));
}

#[test]
fn single_trial_has_zero_standard_error() {
    let record = run_trial(&small(1, 1), 0).unwrap();
    let rows = summarize(std::slice::from_ref(&record));
    assert!(rows.iter().all(|r| r.stderr_best == 0.0));
    assert_eq!(rows.iter().map(|r| r.mean_best).collect::<Vec<_>>(), record.trace);
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let cfg = small(2, 1);
    run_experiment(&cfg, a.path()).unwrap();
    run_experiment(&cfg, b.path()).unwrap();
    assert_eq!(read(&a.path().join("summary.csv")), read(&b.path().join("summary.csv")));
    assert_eq!(read(&a.path().join("config.toml")), read(&b.path().join("config.toml")));
}

#[test]
fn threads_do_not_change_trial_records() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let serial = run_experiment(&small(3, 1), a.path()).unwrap();
    let parallel = run_experiment(&small(3, 3), b.path()).unwrap();
    for (s, p) in serial.records.iter().zip(&parallel.records) {
        assert_eq!(s.trace, p.trace);
        assert_eq!(s.seed, p.seed);
    }
    assert_eq!(read(&a.path().join("summary.csv")), read(&b.path().join("summary.csv")));
}

#[test]
fn output_directory_resolution() {
    assert_eq!(resolve_out_dir(Some("flagged".into())), Path::new("flagged"));
    std::env::set_var(OUT_DIR_ENV, "from_env");
    assert_eq!(resolve_out_dir(None), Path::new("from_env"));
    assert_eq!(resolve_out_dir(Some("flagged".into())), Path::new("flagged"));
    std::env::remove_var(OUT_DIR_ENV);
    assert_eq!(resolve_out_dir(None), Path::new("results"));
}
