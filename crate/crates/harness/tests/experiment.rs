use std::path::Path;
use std::process::Command;

use rsma_uav::scheme::Scheme;
use rsma_uav::Config;
use rsma_uav_harness::output::{fmt_float, mean_std, RUNS_HEADER, SUMMARY_HEADER, TRACE_HEADER};
use rsma_uav_harness::{config_hash, parse_spec, run_experiment, ExperimentSpec, HarnessError, SweepVariable};

fn small_spec(dir: &Path) -> ExperimentSpec {
    let mut cfg = Config::default_scenario();
    cfg.num_users = 2;
    cfg.qos_thresholds = vec![1.0; 2];
    let mut spec = ExperimentSpec::new(cfg, SweepVariable::PMaxDbm, vec![26.0, 23.0]);
    spec.seeds = vec![3, 1];
    spec.schemes = vec![Scheme::Oma, Scheme::Rsma];
    spec.output_dir = dir.to_path_buf();
    spec
}

#[test]
fn spec_file_round_trip() {
    let text = r#"
[scenario]
num_users = 2
p_max_dbm = 20

[experiment]
sweep = "p_max_dbm"
values = [23, 26]
schemes = ["rsma", "noma"]
seeds = [4, 5]
output_dir = "out"
max_outer_iters = 7
"#;
    let spec = parse_spec(text, Path::new("/tmp/exp/spec.toml")).unwrap();
    assert_eq!(spec.scenario.num_users, 2);
    assert_eq!(spec.values, vec![23.0, 26.0]);
    assert_eq!(spec.schemes, vec![Scheme::Rsma, Scheme::Noma]);
    assert_eq!(spec.seeds, vec![4, 5]);
    assert_eq!(spec.output_dir, Path::new("/tmp/exp/out"));
    assert_eq!(spec.settings.max_outer_iters, 7);
    assert!(spec.continuation);
}

#[test]
fn spec_errors_are_descriptive() {
    let bad = |text: &str| parse_spec(text, Path::new("s.toml")).unwrap_err().to_string();
    assert!(bad("[experiment]\nsweep = \"height\"\nvalues = [1]").contains("height"));
    assert!(bad("[experiment]\nsweep = \"p_max_dbm\"").contains("values"));
    assert!(bad("[scenario]\nnoise = 1\n[experiment]\nsweep = \"p_max_dbm\"\nvalues = [1]").contains("noise"));
    let mut spec = small_spec(Path::new("unused"));
    spec.seeds = vec![1, 1];
    assert!(matches!(spec.validate(), Err(HarnessError::Spec(_))));
    spec.seeds = vec![1];
    spec.values.clear();
    assert!(matches!(spec.validate(), Err(HarnessError::Spec(_))));
}

#[test]
fn user_sweep_resizes_thresholds() {
    let cfg = SweepVariable::NumUsers.apply(&Config::default_scenario(), 6.0).unwrap();
    assert_eq!(cfg.num_users, 6);
    assert_eq!(cfg.qos_thresholds.len(), 6);
    assert!(SweepVariable::NumUsers.apply(&Config::default_scenario(), 2.5).is_err());
}

#[test]
fn outputs_are_sorted_and_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run_experiment(&small_spec(a.path())).unwrap();
    run_experiment(&small_spec(b.path())).unwrap();
    for name in ["trace.csv", "runs.csv", "summary.csv", "manifest.json"] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs");
    }
    let keys: Vec<_> = ra.runs.iter().map(|r| (r.sweep_value, r.seed, r.scheme)).collect();
    let mut sorted = keys.clone();
    sorted.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));
    assert_eq!(keys, sorted);
    assert_eq!(ra.exit_code(), 0);

    let runs = std::fs::read_to_string(a.path().join("runs.csv")).unwrap();
    let mut lines = runs.lines();
    assert_eq!(lines.next(), Some(RUNS_HEADER));
    assert_eq!(lines.count(), 8);
    let trace = std::fs::read_to_string(a.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with(TRACE_HEADER));
    for line in trace.lines().skip(1) {
        let hash = line.rsplit(',').next().unwrap();
        assert!(ra.runs.iter().any(|r| r.config_hash == hash));
    }
    let summary = std::fs::read_to_string(a.path().join("summary.csv")).unwrap();
    assert!(summary.starts_with(SUMMARY_HEADER));
    assert_eq!(summary.lines().count(), 1 + 4);
    let manifest: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["schema_version"], 1);
    assert_eq!(manifest["configs"].as_object().unwrap().len(), 2);
}

#[test]
fn budget_continuation_never_loses_efficiency() {
    let dir = tempfile::tempdir().unwrap();
    let mut spec = small_spec(dir.path());
    spec.values = vec![23.0, 26.0, 29.0];
    let rep = run_experiment(&spec).unwrap();
    for &seed in &spec.seeds {
        for &scheme in &spec.schemes {
            let ee: Vec<f64> = rep
                .runs
                .iter()
                .filter(|r| r.seed == seed && r.scheme == scheme)
                .map(|r| r.result.as_ref().unwrap().metrics.energy_efficiency)
                .collect();
            assert!(ee.windows(2).all(|w| w[1] >= w[0] - 1e-8), "{seed} {scheme}: {ee:?}");
        }
    }
}

#[test]
fn hash_and_formatting() {
    let cfg = Config::default_scenario();
    assert_eq!(config_hash(&cfg), config_hash(&cfg.clone()));
    let mut other = cfg.clone();
    other.power_budget *= 2.0;
    assert_ne!(config_hash(&cfg), config_hash(&other));
    assert_eq!(config_hash(&cfg).len(), 16);
    assert_eq!(fmt_float(0.39810717055349725), "3.98107170553e-1");
    assert_eq!(fmt_float(-0.0), "0.00000000000e0");
    assert_eq!(mean_std(&[1.0, 3.0]), (2.0, 2f64.sqrt()));
    assert_eq!(mean_std(&[5.0]), (5.0, 0.0));
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rsma-uav"))
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "p_max_dbm = \"x\"").unwrap();
    let out = cli().args(["sweep", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("p_max_dbm"));

    let missing = cli().args(["run", "/nonexistent/spec.toml"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(2));

    let hard = dir.path().join("hard.toml");
    std::fs::write(&hard, "num_users = 2\nqos_bps_hz = 40\n").unwrap();
    let out = cli()
        .args(["sweep", "--budgets", "23", "--seed", "0", "--scheme", "rsma", "--config"])
        .arg(&hard)
        .arg("--out")
        .arg(dir.path().join("hard"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "{}", String::from_utf8_lossy(&out.stderr));

    let spec = dir.path().join("spec.toml");
    std::fs::write(&spec, "[scenario]\nnum_users = 2\n[experiment]\nsweep = \"p_max_dbm\"\nvalues = [26]\nseeds = [0]\nschemes = [\"rsma\"]\n").unwrap();
    let out = cli().arg("run").arg(&spec).arg("--out").arg(dir.path().join("ok")).args(["--max-iters", "5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("ok/runs.csv").exists());
}

#[test]
fn cli_validate_small_run() {
    let out = cli().args(["validate", "--seed", "0", "--samples", "2000", "--grid-step", "5"]).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("seed 0"), "{text}");
    assert!(matches!(out.status.code(), Some(0 | 1)));
}
