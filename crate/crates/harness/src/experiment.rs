//! Sweeps over seeds, schemes and one scenario parameter.

use std::path::{Path, PathBuf};

use rsma_uav::baselines::{solve_scheme, SchemeResult};
use rsma_uav::scalar::dbm_to_watts;
use rsma_uav::scheme::Scheme;
use rsma_uav::subproblems::SolverSettings;
use rsma_uav::{Config, Point};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ScenarioFile;
use crate::error::{HarnessError, Result};
use crate::scenario::generate_scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// Transmit budget in dBm.
    PMaxDbm,
    /// Number of users; QoS thresholds are resized with the first value.
    NumUsers,
}

impl SweepVariable {
    pub fn name(self) -> &'static str {
        match self {
            Self::PMaxDbm => "p_max_dbm",
            Self::NumUsers => "num_users",
        }
    }

    /// Scenario with the swept parameter set to `value`.
    pub fn apply(self, base: &Config, value: f64) -> Result<Config> {
        let mut cfg = base.clone();
        match self {
            Self::PMaxDbm => cfg.power_budget = dbm_to_watts(value),
            Self::NumUsers => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(HarnessError::Spec(format!("num_users must be a positive integer, got {value}")));
                }
                cfg.num_users = value as usize;
                cfg.qos_thresholds = vec![base.qos_thresholds[0]; cfg.num_users];
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentSpec {
    pub scenario: Config,
    pub sweep: SweepVariable,
    pub values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
    /// Start each budget from the solution at the next lower budget of the
    /// same seed and scheme. Only used for budget sweeps.
    pub continuation: bool,
    pub settings: SolverSettings,
}

impl ExperimentSpec {
    pub fn new(scenario: Config, sweep: SweepVariable, values: Vec<f64>) -> Self {
        Self {
            scenario,
            sweep,
            values,
            schemes: Scheme::ALL.to_vec(),
            seeds: vec![0],
            output_dir: PathBuf::from("results"),
            continuation: true,
            settings: SolverSettings::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(HarnessError::Spec("sweep list is empty".into()));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(HarnessError::Spec("sweep values must be finite".into()));
        }
        if self.schemes.is_empty() {
            return Err(HarnessError::Spec("no scheme selected".into()));
        }
        if self.seeds.is_empty() {
            return Err(HarnessError::Spec("seed list is empty".into()));
        }
        let mut seeds = self.seeds.clone();
        seeds.sort_unstable();
        seeds.dedup();
        if seeds.len() != self.seeds.len() {
            return Err(HarnessError::Spec("seeds must be distinct".into()));
        }
        self.settings.validate()?;
        for &v in &self.values {
            self.sweep.apply(&self.scenario, v)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpecFile {
    #[serde(default)]
    scenario: ScenarioFile,
    experiment: ExperimentTable,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentTable {
    sweep: SweepVariable,
    values: Vec<f64>,
    schemes: Option<Vec<Scheme>>,
    seeds: Option<Vec<u64>>,
    output_dir: Option<PathBuf>,
    continuation: Option<bool>,
    max_outer_iters: Option<usize>,
}

/// Parses an experiment file: a `[scenario]` table (see [`crate::config`])
/// and an `[experiment]` table with `sweep`, `values` and optionally
/// `schemes`, `seeds`, `output_dir`, `continuation`, `max_outer_iters`.
/// A relative `output_dir` is taken relative to the file.
pub fn parse_spec(text: &str, origin: &Path) -> Result<ExperimentSpec> {
    let err = |message: String| HarnessError::Config { path: origin.to_path_buf(), message };
    let file: SpecFile = toml::from_str(text).map_err(|e| err(e.to_string()))?;
    let scenario = file.scenario.resolve().map_err(|m| err(format!("[scenario] {m}")))?;
    let e = file.experiment;
    let mut spec = ExperimentSpec::new(scenario, e.sweep, e.values);
    if let Some(s) = e.schemes {
        spec.schemes = s;
    }
    if let Some(s) = e.seeds {
        spec.seeds = s;
    }
    if let Some(dir) = e.output_dir {
        spec.output_dir = match origin.parent() {
            Some(parent) if dir.is_relative() => parent.join(dir),
            _ => dir,
        };
    }
    if let Some(c) = e.continuation {
        spec.continuation = c;
    }
    if let Some(n) = e.max_outer_iters {
        spec.settings.max_outer_iters = n;
    }
    Ok(spec)
}

pub fn load_spec(path: impl AsRef<Path>) -> Result<ExperimentSpec> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_spec(&text, path)
}

/// First 16 hex digits of the SHA-256 of the scenario's JSON form.
pub fn config_hash(cfg: &Config) -> String {
    let json = serde_json::to_string(cfg).expect("config serializes");
    let digest = Sha256::digest(json.as_bytes());
    digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub sweep_value: f64,
    pub seed: u64,
    pub scheme: Scheme,
    pub config: Config,
    pub config_hash: String,
    pub wall_time_s: f64,
    /// Error text when the pipeline itself failed.
    pub result: std::result::Result<SchemeResult, String>,
}

impl RunOutcome {
    pub fn feasible(&self) -> bool {
        self.result.as_ref().is_ok_and(|r| r.feasible)
    }
}

/// Runs every (value, seed, scheme) combination; results are sorted by
/// value, then seed, then scheme. Pipeline failures are recorded, not raised.
pub fn run_grid(spec: &ExperimentSpec) -> Result<Vec<RunOutcome>> {
    spec.validate()?;
    let mut values = spec.values.clone();
    values.sort_by(f64::total_cmp);
    let continuation = spec.continuation && spec.sweep == SweepVariable::PMaxDbm;
    let mut out = Vec::new();
    for &seed in &spec.seeds {
        for &scheme in &spec.schemes {
            let mut previous: Option<Point> = None;
            for &value in &values {
                let cfg = spec.sweep.apply(&spec.scenario, value)?;
                let (users, _) = generate_scenario(&cfg, seed);
                let start = std::time::Instant::now();
                let init = if continuation { previous.as_ref() } else { None };
                let result = solve_scheme(&cfg, &users, scheme, &spec.settings, init).map_err(|e| e.to_string());
                if let Ok(r) = &result {
                    if r.feasible {
                        previous = Some(r.point.clone());
                    }
                }
                out.push(RunOutcome {
                    sweep_value: value,
                    seed,
                    scheme,
                    config_hash: config_hash(&cfg),
                    config: cfg,
                    wall_time_s: start.elapsed().as_secs_f64(),
                    result,
                });
            }
        }
    }
    out.sort_by(|a, b| {
        a.sweep_value.total_cmp(&b.sweep_value).then(a.seed.cmp(&b.seed)).then(a.scheme.cmp(&b.scheme))
    });
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub runs: Vec<RunOutcome>,
    pub files: Vec<PathBuf>,
}

impl ExperimentReport {
    pub fn infeasible_runs(&self) -> usize {
        self.runs.iter().filter(|r| !r.feasible()).count()
    }

    /// 0 when every run is feasible, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.infeasible_runs() > 0)
    }
}

/// Runs the grid and writes the trace, run, summary and manifest files.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let runs = run_grid(spec)?;
    let files = crate::output::write_all(spec, &runs)?;
    Ok(ExperimentReport { runs, files })
}
