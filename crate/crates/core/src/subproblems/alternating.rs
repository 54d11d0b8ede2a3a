//! Outer loop alternating placement and beamforming.

use super::{
    dinkelbach_beamforming, restore_feasibility, sca_location, Evaluation, Instance, SolveTrace, SolverSettings, Stage,
    TraceRecord,
};
use crate::error::Result;
use crate::Point;

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub point: Point,
    pub eval: Evaluation,
    pub trace: SolveTrace,
    /// The returned point satisfies the true constraints.
    pub feasible: bool,
    /// Relative EE change fell below the outer tolerance.
    pub converged: bool,
    pub outer_iterations: usize,
    /// Dinkelbach parameter and objective at the end of the last inner loop.
    pub final_tau: f64,
    pub final_phi: f64,
}

fn outer_record(trace: &mut SolveTrace, outer: usize, eval: &Evaluation) {
    trace.push(TraceRecord {
        stage: Stage::Outer,
        outer,
        sca: 0,
        dinkelbach: 0,
        objective: eval.ee(),
        tau: None,
        energy_efficiency: eval.ee(),
        transmit_power: eval.metrics.transmit_power,
        max_residual: eval.report.max_residual(),
        damping: 0,
        elapsed_s: 0.0,
    });
}

/// Alternates the placement SCA and the Dinkelbach beamforming until the
/// relative EE gain of a full round drops below `outer_tolerance`.
pub fn alternating_optimize(inst: &Instance, init: &Point, settings: &SolverSettings) -> Result<Solution> {
    settings.validate()?;
    let mut trace = SolveTrace::new();
    let channels = inst.channels(init.uav_xy)?;
    let (mut current, feasible) = restore_feasibility(inst, &channels, init, settings, &mut trace)?;
    let mut eval = inst.evaluate(&current)?;
    outer_record(&mut trace, 0, &eval);
    let mut solution = Solution {
        point: current.clone(),
        eval: eval.clone(),
        trace: SolveTrace::new(),
        feasible,
        converged: false,
        outer_iterations: 0,
        final_tau: eval.ee(),
        final_phi: 0.0,
    };
    if !feasible {
        solution.trace = trace;
        return Ok(solution);
    }
    for outer in 1..=settings.max_outer_iters {
        let placed = sca_location(inst, &current, settings, &mut trace, outer)?;
        let channels = inst.channels(placed.point.uav_xy)?;
        let beams = dinkelbach_beamforming(inst, &channels, &placed.point, settings, &mut trace, outer)?;
        let gain = (beams.eval.ee() - eval.ee()) / eval.ee().max(f64::MIN_POSITIVE);
        current = beams.point;
        eval = beams.eval;
        outer_record(&mut trace, outer, &eval);
        solution.final_tau = beams.final_tau;
        solution.final_phi = beams.final_phi;
        solution.outer_iterations = outer;
        if gain < settings.outer_tolerance {
            solution.converged = true;
            break;
        }
    }
    if !solution.converged {
        trace.diagnostics.push(super::Diagnostic::IterationCap { stage: Stage::Outer, outer: solution.outer_iterations });
    }
    solution.point = current;
    solution.eval = eval;
    solution.trace = trace;
    Ok(solution)
}
