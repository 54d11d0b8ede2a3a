//! UAV placement for a fixed beamformer and common-rate split.
//!
//! With the AoDs frozen every stream reaching user `u` shares the path loss
//! `S_u(z) = 1 + H^2 + |z - z_u|^2` (exponent 2), so a link's desired power
//! is `C_d / S_u(z)` and its interference `C_I / S_u(z)`. The desired power
//! is bounded below by the tangent of `1/S` in `S` (concave in `z`), the
//! interference above by `C_I / S_lin(z)` with `S_lin` the tangent of `S` in
//! `z` (convex). Both bounds are global, so every program solution is
//! feasible for the true constraints.

use std::f64::consts::LN_2;
use std::ops::Range;

use super::{damp, Diagnostic, Evaluation, Instance, SolveTrace, SolverSettings, Stage, TraceRecord};
use crate::error::{Error, Result};
use crate::linearize::{signal_power_surrogate_z, PowerBound};
use crate::program::{AffineExpr, ConstraintTag, ConvexProgram, Family};
use crate::scheme::RateRole;
use crate::Point;

const DEAD_LINK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LocationReference {
    pub point: Point,
    /// True SINR of each rate variable at the reference position.
    pub sinr: Vec<f64>,
    /// Per link: interference plus noise in noise units.
    pub interference: Vec<f64>,
    /// Per link: `gain * M |alpha|^2 |a^H y_d|^2 / sigma^2`.
    pub desired_coefficient: Vec<f64>,
    /// Per link: the same summed over interfering columns.
    pub interference_coefficient: Vec<f64>,
    /// Per link: `S_u(z_r)`.
    pub path_loss: Vec<f64>,
}

fn require_square_law(inst: &Instance) -> Result<()> {
    if (inst.cfg.pathloss_exponent - 2.0).abs() > 1e-12 {
        return Err(Error::Unsupported(format!(
            "placement program needs path-loss exponent 2, got {}",
            inst.cfg.pathloss_exponent
        )));
    }
    Ok(())
}

pub fn location_reference(inst: &Instance, point: &Point) -> Result<LocationReference> {
    require_square_law(inst)?;
    point.check_shape(&inst.cfg)?;
    let cfg = &inst.cfg;
    let y = &point.beamformers;
    let coefficient = |u: usize, j: usize| -> Result<f64> {
        let s = signal_power_surrogate_z(cfg, y, &inst.users[u], j, point.uav_xy, PowerBound::ConcaveLower)?;
        Ok(s.coefficient / cfg.noise_power)
    };
    let mut sinr = vec![f64::INFINITY; inst.links.vars.len()];
    let (mut interference, mut desired_coefficient, mut interference_coefficient, mut path_loss) =
        (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for link in &inst.links.links {
        let c_d = link.gain * coefficient(link.user, link.desired)?;
        let c_i = link.gain * link.interferers.iter().map(|&j| coefficient(link.user, j)).sum::<Result<f64>>()?;
        let zu = inst.users[link.user].position;
        let dx = point.uav_xy[0] - zu[0];
        let dy = point.uav_xy[1] - zu[1];
        let s = 1.0 + cfg.uav_height * cfg.uav_height + dx * dx + dy * dy;
        let iota = 1.0 + c_i / s;
        sinr[link.var] = sinr[link.var].min(c_d / s / iota);
        interference.push(iota);
        desired_coefficient.push(c_d);
        interference_coefficient.push(c_i);
        path_loss.push(s);
    }
    Ok(LocationReference { point: point.clone(), sinr, interference, desired_coefficient, interference_coefficient, path_loss })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocationProgram {
    pub program: ConvexProgram,
    pub position: Range<usize>,
    pub sinr: Range<usize>,
    pub log_rate: Range<usize>,
    weights: Vec<f64>,
}

impl LocationProgram {
    pub fn position(&self, v: &[f64]) -> [f64; 2] {
        [v[self.position.start], v[self.position.start + 1]]
    }

    /// Surrogate sum of private rates at a program point.
    pub fn surrogate_rate(&self, v: &[f64]) -> f64 {
        self.weights.iter().zip(&v[self.log_rate.clone()]).map(|(w, t)| w * t / LN_2).sum()
    }

    /// Program point equal to the reference with every slack at its true value.
    pub fn reference_vector(&self, reference: &LocationReference) -> Vec<f64> {
        let mut v = vec![0.0; self.program.num_vars];
        v[self.position.start] = reference.point.uav_xy[0];
        v[self.position.start + 1] = reference.point.uav_xy[1];
        for (n, s) in reference.sinr.iter().enumerate() {
            v[self.sinr.start + n] = *s;
        }
        let iota = self.program.block("interference").cloned().unwrap_or(0..0);
        let inv = self.program.block("inverse_path_loss").cloned().unwrap_or(0..0);
        for (li, i) in reference.interference.iter().enumerate() {
            v[iota.start + li] = *i;
            v[inv.start + li] = 1.0;
        }
        // Private rate variables come first in every link set.
        for n in 0..self.log_rate.len() {
            v[self.log_rate.start + n] = reference.sinr[n].ln_1p();
        }
        v
    }
}

/// Convex placement program around `reference` (beamformer and split fixed).
pub fn build_location_program(inst: &Instance, reference: &LocationReference) -> Result<LocationProgram> {
    require_square_law(inst)?;
    let cfg = &inst.cfg;
    let links = &inst.links;
    let point = &reference.point;
    let zr = point.uav_xy;
    let mut p = ConvexProgram::new();
    let z = p.add_block("position", 2);
    let sinr = p.add_block("sinr", links.vars.len());
    let iota = p.add_block("interference", links.links.len());
    let inv = p.add_block("inverse_path_loss", links.links.len());
    let private_vars: Vec<usize> = (0..links.vars.len()).filter(|&v| links.vars[v].role == RateRole::Private).collect();
    let log_rate = p.add_block("log_rate", private_vars.len());
    p.notes.push("log2(1 + f) via exponential-cone epigraph".into());
    let zx = AffineExpr::var(z.start);
    let zy = AffineExpr::var(z.start + 1);

    for (li, link) in links.links.iter().enumerate() {
        let tag = match links.vars[link.var].role {
            RateRole::Private => ConstraintTag::user(Family::PrivateRate, link.user),
            RateRole::Common => ConstraintTag::user(Family::CommonDecoding, link.user),
        };
        let zu = inst.users[link.user].position;
        let s_ref = reference.path_loss[li];
        let (s_r, i_r) = (reference.sinr[link.var], reference.interference[li]);
        let s = sinr.start + link.var;
        let i = iota.start + li;
        let t = inv.start + li;
        let c_i = reference.interference_coefficient[li];
        // t = S_r / S(z) upper-bounded through t * S_lin(z) / S_r >= 1.
        let s_lin = AffineExpr::constant(1.0)
            .add_term(z.start, 2.0 * (zr[0] - zu[0]) / s_ref)
            .add_term(z.start + 1, 2.0 * (zr[1] - zu[1]) / s_ref)
            .add_constant(-2.0 * ((zr[0] - zu[0]) * zr[0] + (zr[1] - zu[1]) * zr[1]) / s_ref);
        if c_i > 0.0 {
            p.rotated_soc(AffineExpr::var(t), s_lin, vec![AffineExpr::constant(std::f64::consts::SQRT_2)], tag);
        } else {
            p.eq0(AffineExpr::var(t).add_constant(-1.0), ConstraintTag::aux());
        }
        let interference = AffineExpr::constant(1.0).add_term(t, c_i / s_ref);
        p.geq(AffineExpr::term(i, 1.0 / i_r), &interference.scaled(1.0 / i_r), tag);

        let c_d = reference.desired_coefficient[li];
        if s_r <= DEAD_LINK || c_d <= 0.0 {
            p.geq0(AffineExpr::term(s, -1.0), tag);
            continue;
        }
        // c_d (2/S_r - S(z)/S_r^2) >= p_r^2 ((s/s_r + i/i_r)/2)^2, divided by p_r^2.
        let kappa = c_d / (s_r * i_r);
        let h2 = cfg.uav_height * cfg.uav_height;
        let lhs = AffineExpr::constant(kappa * (2.0 / s_ref - (1.0 + h2) / (s_ref * s_ref)));
        let r = kappa.sqrt() / s_ref;
        let w = vec![
            zx.scaled(r).add_constant(-r * zu[0]),
            zy.scaled(r).add_constant(-r * zu[1]),
            AffineExpr::term(s, 0.5 / s_r).add_term(i, 0.5 / i_r),
        ];
        p.square_epigraph(lhs, w, tag);
    }

    for (v, var) in links.vars.iter().enumerate() {
        p.geq0(AffineExpr::var(sinr.start + v), ConstraintTag::user(Family::Nonnegativity, var.user));
    }
    for (li, link) in links.links.iter().enumerate() {
        p.geq0(AffineExpr::var(iota.start + li), ConstraintTag::user(Family::Nonnegativity, link.user));
    }
    let mut weights = Vec::new();
    for (n, &v) in private_vars.iter().enumerate() {
        let var = &links.vars[v];
        let t = log_rate.start + n;
        p.exp_cone(AffineExpr::var(t), AffineExpr::constant(1.0), AffineExpr::var(sinr.start + v).add_constant(1.0), ConstraintTag::aux());
        let need = LN_2 * (cfg.qos_thresholds[var.user] - point.common_rates[var.user]);
        p.geq0(AffineExpr::term(t, var.weight).add_constant(-need), ConstraintTag::user(Family::Qos, var.user));
        weights.push(var.weight);
    }
    let split: f64 = point.common_rates.iter().sum();
    for v in links.common_vars() {
        let need = split.exp2() - 1.0;
        p.geq0(AffineExpr::var(sinr.start + v).add_constant(-need), ConstraintTag::user(Family::CommonDecoding, links.vars[v].user));
    }
    // The beampattern does not depend on the position: a constant row.
    let mse = crate::model::beampattern_mse(&point.beamformers, &cfg.targets, cfg.spacing_ratio)?;
    p.geq0(AffineExpr::constant(cfg.beampattern_tolerance - mse), ConstraintTag::global(Family::Beampattern));
    for c in [z.start, z.start + 1] {
        p.geq0(AffineExpr::var(c), ConstraintTag::aux());
        p.geq0(AffineExpr::term(c, -1.0).add_constant(cfg.area_side), ConstraintTag::aux());
    }
    p.linear_objective = weights.iter().enumerate().fold(AffineExpr::default(), |e, (n, w)| e.add_term(log_rate.start + n, -w / LN_2));
    p.validate()?;
    Ok(LocationProgram { program: p, position: z, sinr, log_rate, weights })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocationOutcome {
    pub point: Point,
    pub eval: Evaluation,
    /// True sum of private rates at the returned position.
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn private_sum(eval: &Evaluation) -> f64 {
    eval.metrics.private_rate.iter().sum()
}

/// SCA over the UAV position; `start` must satisfy the true constraints.
pub fn sca_location(
    inst: &Instance,
    start: &Point,
    settings: &SolverSettings,
    trace: &mut SolveTrace,
    outer: usize,
) -> Result<LocationOutcome> {
    settings.validate()?;
    let tol = settings.feasibility_tolerance;
    let mut current = start.clone();
    let mut eval = inst.evaluate(&current)?;
    if !eval.feasible(tol) {
        return Err(Error::Infeasible(format!(
            "placement start violates constraints by {:.3e}",
            eval.report.max_residual()
        )));
    }
    let mut converged = false;
    let mut iterations = 0;
    for it in 1..=settings.max_sca_iters {
        iterations = it;
        let reference = location_reference(inst, &current)?;
        let program = build_location_program(inst, &reference)?;
        let sol = trace.solve(&program.program, &settings.conic)?;
        if !trace.usable(&program.program, &sol, Stage::Location, outer) {
            break;
        }
        let target = program.position(&sol.x);
        let zr = current.uav_xy;
        let damped = damp(settings.damping_limit, tol, eval.ee(), |w| {
            let p = Point { uav_xy: [zr[0] + (target[0] - zr[0]) * w, zr[1] + (target[1] - zr[1]) * w], ..current.clone() };
            let e = inst.evaluate(&p)?;
            Ok((p, e))
        })?;
        let before = private_sum(&eval);
        let Some(step) = damped else {
            if program.surrogate_rate(&sol.x) - before <= settings.sca_tolerance * before.abs().max(1e-12) {
                converged = true;
            } else {
                trace.diagnostics.push(Diagnostic::DampingExhausted { stage: Stage::Location, outer });
            }
            break;
        };
        current = step.value;
        eval = step.eval;
        let after = private_sum(&eval);
        trace.push(TraceRecord {
            stage: Stage::Location,
            outer,
            sca: it,
            dinkelbach: 0,
            objective: after,
            tau: None,
            energy_efficiency: eval.ee(),
            transmit_power: eval.metrics.transmit_power,
            max_residual: eval.report.max_residual(),
            damping: step.halvings,
            elapsed_s: 0.0,
        });
        if (after - before) <= settings.sca_tolerance * before.abs().max(1e-12) {
            converged = true;
            break;
        }
    }
    if !converged && iterations == settings.max_sca_iters {
        trace.diagnostics.push(Diagnostic::IterationCap { stage: Stage::Location, outer });
    }
    Ok(LocationOutcome { objective: private_sum(&eval), point: current, eval, iterations, converged })
}
