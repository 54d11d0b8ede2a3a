use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rsma_uav::scheme::Scheme;
use rsma_uav::subproblems::SolverSettings;
use rsma_uav::Config;
use rsma_uav_harness::output::mean_std;
use rsma_uav_harness::validate::{oracle_suite, small_config};
use rsma_uav_harness::{load_config, load_spec, run_experiment, ExperimentReport, ExperimentSpec, HarnessError, SweepVariable};

/// Energy-efficient RSMA joint communication and sensing from a UAV.
#[derive(Debug, Parser)]
#[command(name = "rsma-uav", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment file.
    Run {
        spec: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Sweep the transmit budget on a scenario.
    Sweep {
        /// Scenario file; the default scenario when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Budgets in dBm.
        #[arg(long, value_delimiter = ',', default_values_t = [23.0, 26.0, 29.0, 32.0])]
        budgets: Vec<f64>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Compare the subproblem solvers with the brute-force oracles.
    Validate {
        /// Seeds of the two-user, two-antenna instances.
        #[arg(long = "seed")]
        seeds: Vec<u64>,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Placement grid spacing in metres.
        #[arg(long, default_value_t = 1.0)]
        grid_step: f64,
    },
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Seeds to run (repeatable); overrides the file.
    #[arg(long = "seed")]
    seeds: Vec<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Schemes to run (repeatable).
    #[arg(long = "scheme")]
    schemes: Vec<Scheme>,
    /// Cap on outer iterations.
    #[arg(long)]
    max_iters: Option<usize>,
    /// Solve every budget from the default start.
    #[arg(long)]
    no_continuation: bool,
}

impl CommonArgs {
    fn apply(&self, spec: &mut ExperimentSpec) {
        if !self.seeds.is_empty() {
            spec.seeds = self.seeds.clone();
        }
        if let Some(out) = &self.out {
            spec.output_dir = out.clone();
        }
        if !self.schemes.is_empty() {
            spec.schemes = self.schemes.clone();
        }
        if let Some(n) = self.max_iters {
            spec.settings.max_outer_iters = n;
        }
        if self.no_continuation {
            spec.continuation = false;
        }
    }
}

fn report(spec: &ExperimentSpec, report: &ExperimentReport) {
    let mut values = spec.values.clone();
    values.sort_by(f64::total_cmp);
    values.dedup();
    println!("{:>10} {:>6} {:>22} {:>22}", spec.sweep.name(), "scheme", "EE (bit/J/Hz)", "power (W)");
    for v in values {
        for scheme in &spec.schemes {
            let rows: Vec<_> = report
                .runs
                .iter()
                .filter(|r| r.sweep_value == v && r.scheme == *scheme)
                .filter_map(|r| r.result.as_ref().ok().filter(|x| x.feasible))
                .collect();
            let (em, es) = mean_std(&rows.iter().map(|r| r.metrics.energy_efficiency).collect::<Vec<_>>());
            let (pm, ps) = mean_std(&rows.iter().map(|r| r.metrics.transmit_power).collect::<Vec<_>>());
            println!("{v:>10} {scheme:>6} {em:>12.4} +- {es:<7.4} {pm:>12.5} +- {ps:<7.5}");
        }
    }
    for run in report.runs.iter().filter(|r| !r.feasible()) {
        let why = match &run.result {
            Ok(r) => format!("{:?}", r.trace.diagnostics),
            Err(e) => e.clone(),
        };
        eprintln!("infeasible: {} = {}, seed {}, {}: {why}", spec.sweep.name(), run.sweep_value, run.seed, run.scheme);
    }
    for f in &report.files {
        println!("wrote {}", f.display());
    }
}

fn experiment(spec: &ExperimentSpec) -> Result<ExitCode, HarnessError> {
    let rep = run_experiment(spec)?;
    report(spec, &rep);
    Ok(ExitCode::from(rep.exit_code() as u8))
}

fn run(cli: Cli) -> Result<ExitCode, HarnessError> {
    match cli.command {
        Command::Run { spec, common } => {
            let mut spec = load_spec(spec)?;
            common.apply(&mut spec);
            experiment(&spec)
        }
        Command::Sweep { config, budgets, common } => {
            let cfg = match config {
                Some(path) => load_config(path)?,
                None => Config::default_scenario(),
            };
            let mut spec = ExperimentSpec::new(cfg, SweepVariable::PMaxDbm, budgets);
            spec.seeds = (0..5).collect();
            common.apply(&mut spec);
            experiment(&spec)
        }
        Command::Validate { seeds, samples, grid_step } => {
            let seeds = if seeds.is_empty() { (0..5).collect() } else { seeds };
            let checks = oracle_suite(&small_config(), &seeds, samples, grid_step, &SolverSettings::default())?;
            let mut ok = true;
            for c in &checks {
                let verdict = if c.passes() { "PASS" } else { "FAIL" };
                ok &= c.passes();
                println!(
                    "{verdict} seed {}: placement {:.6} vs grid {:.6}; beamforming EE {:.4} vs sampled {:.4} ({} feasible draws)",
                    c.seed, c.location_objective, c.grid_objective, c.beamforming_ee, c.sampler_ee, c.feasible_samples
                );
            }
            Ok(ExitCode::from(u8::from(!ok)))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
