//! Result files. Floats are written with 12 significant digits and nothing
//! time-dependent is recorded, so identical specs give identical bytes.
//!
//! * `trace.csv`: one row per trace record (convergence data).
//! * `runs.csv`: one row per run (converged EE and power).
//! * `summary.csv`: mean and sample standard deviation over feasible seeds
//!   per sweep value and scheme.
//! * `manifest.json`: schema version, spec, settings and every scenario
//!   keyed by its hash.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rsma_uav::scheme::Scheme;
use serde_json::json;

use crate::error::{HarnessError, Result};
use crate::experiment::{ExperimentSpec, RunOutcome};

pub const SCHEMA_VERSION: u32 = 1;

pub const TRACE_HEADER: &str = "sweep_value,seed,scheme,iteration,objective,tau,power_w,ee,feasible,stage,config_hash";
pub const RUNS_HEADER: &str =
    "sweep_value,seed,scheme,ee,power_w,feasible,converged,outer_iterations,solves,final_tau,final_phi,max_residual,config_hash";
pub const SUMMARY_HEADER: &str = "sweep_value,scheme,runs,feasible_runs,ee_mean,ee_std,power_mean_w,power_std_w";

pub fn fmt_float(v: f64) -> String {
    // `-0.0` prints with a sign; normalize it.
    let v = if v == 0.0 { 0.0 } else { v };
    format!("{v:.11e}")
}

fn stage_name(stage: rsma_uav::subproblems::Stage) -> &'static str {
    use rsma_uav::subproblems::Stage;
    match stage {
        Stage::Restoration => "restoration",
        Stage::Location => "location",
        Stage::Beamforming => "beamforming",
        Stage::Outer => "outer",
    }
}

pub fn trace_csv(runs: &[RunOutcome], tolerance: f64) -> String {
    let mut s = format!("{TRACE_HEADER}\n");
    for run in runs {
        let Ok(r) = &run.result else { continue };
        for (i, rec) in r.trace.records.iter().enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{},{},{}",
                fmt_float(run.sweep_value),
                run.seed,
                run.scheme,
                i,
                fmt_float(rec.objective),
                rec.tau.map(fmt_float).unwrap_or_default(),
                fmt_float(rec.transmit_power),
                fmt_float(rec.energy_efficiency),
                rec.max_residual <= tolerance,
                stage_name(rec.stage),
                run.config_hash
            );
        }
    }
    s
}

pub fn runs_csv(runs: &[RunOutcome]) -> String {
    let mut s = format!("{RUNS_HEADER}\n");
    for run in runs {
        let head = format!("{},{},{}", fmt_float(run.sweep_value), run.seed, run.scheme);
        match &run.result {
            Ok(r) => {
                let residual = r.trace.records.last().map_or(f64::NAN, |x| x.max_residual);
                let _ = writeln!(
                    s,
                    "{head},{},{},{},{},{},{},{},{},{},{}",
                    fmt_float(r.metrics.energy_efficiency),
                    fmt_float(r.metrics.transmit_power),
                    r.feasible,
                    r.converged,
                    r.trace.outer_ee().len().saturating_sub(1),
                    r.trace.solve_count,
                    fmt_float(r.final_tau),
                    fmt_float(r.final_phi),
                    fmt_float(residual),
                    run.config_hash
                );
            }
            Err(_) => {
                let _ = writeln!(s, "{head},,,false,false,,,,,,{}", run.config_hash);
            }
        }
    }
    s
}

/// Mean and sample standard deviation (zero for a single sample).
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() == 1 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Sweep value, run count, feasible EE values, feasible power values.
type Group = (f64, usize, Vec<f64>, Vec<f64>);

pub fn summary_csv(runs: &[RunOutcome]) -> String {
    let mut groups: BTreeMap<(u64, Scheme), Group> = BTreeMap::new();
    for run in runs {
        let g = groups.entry((run.sweep_value.to_bits(), run.scheme)).or_insert((run.sweep_value, 0, Vec::new(), Vec::new()));
        g.1 += 1;
        if let Ok(r) = &run.result {
            if r.feasible {
                g.2.push(r.metrics.energy_efficiency);
                g.3.push(r.metrics.transmit_power);
            }
        }
    }
    let mut rows: Vec<_> = groups.into_iter().map(|((_, scheme), g)| (g.0, scheme, g)).collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut s = format!("{SUMMARY_HEADER}\n");
    for (value, scheme, (_, total, ee, power)) in rows {
        let (em, es) = mean_std(&ee);
        let (pm, ps) = mean_std(&power);
        let _ = writeln!(
            s,
            "{},{scheme},{total},{},{},{},{},{}",
            fmt_float(value),
            ee.len(),
            fmt_float(em),
            fmt_float(es),
            fmt_float(pm),
            fmt_float(ps)
        );
    }
    s
}

pub fn manifest(spec: &ExperimentSpec, runs: &[RunOutcome], files: &[&str]) -> serde_json::Value {
    let configs: BTreeMap<&str, &rsma_uav::Config> = runs.iter().map(|r| (r.config_hash.as_str(), &r.config)).collect();
    let run_list: Vec<_> = runs
        .iter()
        .map(|r| {
            json!({
                "sweep_value": r.sweep_value,
                "seed": r.seed,
                "scheme": r.scheme,
                "config_hash": r.config_hash,
                "feasible": r.feasible(),
                "error": r.result.as_ref().err(),
            })
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "generator": concat!("rsma-uav-harness ", env!("CARGO_PKG_VERSION")),
        "sweep": spec.sweep.name(),
        "values": spec.values,
        "schemes": spec.schemes,
        "seeds": spec.seeds,
        "continuation": spec.continuation,
        "settings": spec.settings,
        "files": files,
        "configs": configs,
        "runs": run_list,
        "infeasible_runs": runs.iter().filter(|r| !r.feasible()).count(),
    })
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| HarnessError::io(&path, e))?;
    Ok(path)
}

pub fn write_all(spec: &ExperimentSpec, runs: &[RunOutcome]) -> Result<Vec<PathBuf>> {
    let dir = &spec.output_dir;
    std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let names = ["trace.csv", "runs.csv", "summary.csv", "manifest.json"];
    let tolerance = spec.settings.feasibility_tolerance;
    let mut files = vec![
        write(dir, names[0], &trace_csv(runs, tolerance))?,
        write(dir, names[1], &runs_csv(runs))?,
        write(dir, names[2], &summary_csv(runs))?,
    ];
    let manifest = serde_json::to_string_pretty(&manifest(spec, runs, &names))?;
    files.push(write(dir, names[3], &(manifest + "\n"))?);
    Ok(files)
}
