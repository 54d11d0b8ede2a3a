//! Beamformer and common-rate split for a fixed UAV position.

use std::f64::consts::LN_2;
use std::ops::Range;

use super::expr::BeamBlock;
use super::{damp, normalized, Diagnostic, Evaluation, Instance, RadarSurrogate, SolveTrace, SolverSettings, Stage, TraceRecord};
use crate::error::{Error, Result};
use crate::linearize::{beampattern_surrogate, devectorize, rotate_beamformer, BeampatternVariable};
use crate::model::{inner, steering_vector};
use crate::program::{AffineExpr, ConstraintTag, ConvexProgram, Family};
use crate::scheme::RateRole;
use crate::{Beams, Channels, Cplx, Point};

/// Below this reference SINR a link is treated as carrying nothing.
const DEAD_LINK: f64 = 1e-12;

/// Linearization point: the current iterate with private columns rotated
/// toward their users, and the true slack values there.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingReference {
    pub point: Point,
    /// True SINR of each rate variable.
    pub sinr: Vec<f64>,
    /// Interference plus noise of each link, in units of the noise power.
    pub interference: Vec<f64>,
    /// `h^H y_d / sigma` of each link.
    pub gains: Vec<Cplx>,
}

pub fn beamforming_reference(inst: &Instance, channels: &Channels, point: &Point) -> Result<BeamformingReference> {
    point.check_shape(&inst.cfg)?;
    let y = rotate_beamformer(&point.beamformers, channels);
    let hn = normalized(channels, inst.cfg.noise_power);
    let mut sinr = vec![f64::INFINITY; inst.links.vars.len()];
    let mut interference = Vec::with_capacity(inst.links.links.len());
    let mut gains = Vec::with_capacity(inst.links.links.len());
    for link in &inst.links.links {
        let h = &hn[link.user];
        let g = inner(h, y.column(link.desired));
        let iota = 1.0 + link.gain * link.interferers.iter().map(|&j| inner(h, y.column(j)).norm_sqr()).sum::<f64>();
        sinr[link.var] = sinr[link.var].min(link.gain * g.norm_sqr() / iota);
        interference.push(iota);
        gains.push(g);
    }
    Ok(BeamformingReference { point: Point { beamformers: y, ..point.clone() }, sinr, interference, gains })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingLayout {
    pub beamformers: Range<usize>,
    pub common_rates: Range<usize>,
    pub sinr: Range<usize>,
    pub interference: Range<usize>,
    /// `ln(1 + s_v)` epigraph of each private rate variable.
    pub log_rate: Range<usize>,
    pub radar_gap: Range<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingProgram {
    pub program: ConvexProgram,
    pub layout: BeamformingLayout,
    pub tau: f64,
    num_antennas: usize,
    num_users: usize,
    private_vars: Vec<usize>,
    weights: Vec<f64>,
    fixed_power: f64,
}

/// Solution of one parametric program, read back in physical units.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingCandidate {
    pub beamformers: Beams,
    pub common_rates: Vec<f64>,
    pub sinr: Vec<f64>,
    /// `sum beta + sum_v w_v log2(1 + s_v)` from the program's slacks.
    pub surrogate_rate: f64,
    pub transmit_power: f64,
    /// Parametric objective `power - rate / tau`.
    pub phi: f64,
}

impl BeamformingProgram {
    pub fn extract(&self, v: &[f64]) -> Result<BeamformingCandidate> {
        let l = &self.layout;
        let mut beamformers = devectorize(&v[l.beamformers.clone()], self.num_antennas, self.num_users)?;
        if l.common_rates.is_empty() {
            beamformers.column_mut(0).iter_mut().for_each(|c| *c = Cplx::new(0.0, 0.0));
        }
        let common_rates: Vec<f64> = if l.common_rates.is_empty() {
            vec![0.0; self.num_users]
        } else {
            v[l.common_rates.clone()].iter().map(|b| b.max(0.0)).collect()
        };
        let sinr: Vec<f64> = v[l.sinr.clone()].iter().map(|s| s.max(0.0)).collect();
        let logs = &v[l.log_rate.clone()];
        let surrogate_rate = common_rates.iter().sum::<f64>()
            + self.weights.iter().zip(logs).map(|(w, t)| w * t / LN_2).sum::<f64>();
        let transmit_power = beamformers.power();
        Ok(BeamformingCandidate {
            phi: transmit_power + self.fixed_power - surrogate_rate / self.tau,
            beamformers,
            common_rates,
            sinr,
            surrogate_rate,
            transmit_power,
        })
    }

    pub fn private_vars(&self) -> &[usize] {
        &self.private_vars
    }
}

fn tag_for(inst: &Instance, var: usize, receiver: usize) -> ConstraintTag {
    match inst.links.vars[var].role {
        RateRole::Private => ConstraintTag::user(Family::PrivateRate, receiver),
        RateRole::Common => ConstraintTag::user(Family::CommonDecoding, receiver),
    }
}

/// Parametric program `min tr(yy^H) + P_fix - (sum beta + sum w log2(1+s)) / tau`
/// whose feasible set is an inner approximation of the true one around the
/// reference. `tau` is an energy efficiency, so the optimal value is zero
/// exactly when `tau` is the best achievable ratio.
pub fn build_beamforming_program(
    inst: &Instance,
    channels: &Channels,
    reference: &BeamformingReference,
    tau: f64,
    settings: &SolverSettings,
) -> Result<BeamformingProgram> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("Dinkelbach parameter must be positive, got {tau}")));
    }
    let cfg = &inst.cfg;
    let links = &inst.links;
    let (m, k) = (cfg.num_antennas, cfg.num_users);
    let hn = normalized(channels, cfg.noise_power);
    let yr = &reference.point.beamformers;

    let mut p = ConvexProgram::new();
    let y = p.add_block("beamformers", 2 * m * (k + 1));
    let beta = p.add_block("common_rates", if links.uses_common() { k } else { 0 });
    let sinr = p.add_block("sinr", links.vars.len());
    let iota = p.add_block("interference", links.links.len());
    let private_vars: Vec<usize> = (0..links.vars.len()).filter(|&v| links.vars[v].role == RateRole::Private).collect();
    let log_rate = p.add_block("log_rate", private_vars.len());
    let radar_gap = p.add_block("radar_gap", if settings.radar == RadarSurrogate::Inner { cfg.targets.len() } else { 0 });
    let yb = BeamBlock { offset: y.start, num_antennas: m };
    p.notes.push("log2(1 + s) via exponential-cone epigraph; signal bounds in balanced AM-GM form".into());

    for (li, link) in links.links.iter().enumerate() {
        let h = &hn[link.user];
        let tag = tag_for(inst, link.var, link.user);
        let s = sinr.start + link.var;
        let i = iota.start + li;
        let (s_r, i_r) = (reference.sinr[link.var], reference.interference[li]);
        if link.interferers.is_empty() {
            p.geq(AffineExpr::var(i), &AffineExpr::constant(1.0), tag);
        } else {
            let comps = yb.components(h, link.interferers.iter().copied(), (link.gain / i_r).sqrt());
            p.square_epigraph(AffineExpr::term(i, 1.0 / i_r).add_constant(-1.0 / i_r), comps, tag);
        }
        if s_r <= DEAD_LINK {
            p.geq0(AffineExpr::term(s, -1.0), tag);
            continue;
        }
        // sqrt(s i) <= p_r (s / s_r + i / i_r) / 2 with equality at the reference.
        let p_r = (s_r * i_r).sqrt();
        let mean = AffineExpr::term(s, 0.5 / s_r).add_term(i, 0.5 / i_r);
        if link.aligned {
            let [re, _] = yb.inner(h, link.desired, link.gain.sqrt() / p_r);
            p.geq(re, &mean, tag);
        } else {
            let lhs = yb.gain_tangent(h, link.desired, reference.gains[li]).scaled(link.gain / (p_r * p_r));
            p.square_epigraph(lhs, vec![mean], tag);
        }
    }

    for (v, var) in links.vars.iter().enumerate() {
        p.geq0(AffineExpr::var(sinr.start + v), ConstraintTag::user(Family::Nonnegativity, var.user));
    }
    for (li, link) in links.links.iter().enumerate() {
        p.geq0(AffineExpr::var(iota.start + li), ConstraintTag::user(Family::Nonnegativity, link.user));
    }
    let mut weights = Vec::with_capacity(private_vars.len());
    for (n, &v) in private_vars.iter().enumerate() {
        let var = &links.vars[v];
        let t = log_rate.start + n;
        p.exp_cone(AffineExpr::var(t), AffineExpr::constant(1.0), AffineExpr::var(sinr.start + v).add_constant(1.0), ConstraintTag::aux());
        let mut qos = AffineExpr::term(t, var.weight).add_constant(-LN_2 * cfg.qos_thresholds[var.user]);
        if !beta.is_empty() {
            qos = qos.add_term(beta.start + var.user, LN_2);
        }
        p.geq0(qos, ConstraintTag::user(Family::Qos, var.user));
        weights.push(var.weight);
    }
    if !beta.is_empty() {
        let split = beta.clone().fold(AffineExpr::default(), |e, b| e.add_term(b, LN_2));
        for v in links.common_vars() {
            let u = links.vars[v].user;
            p.exp_cone(split.clone(), AffineExpr::constant(1.0), AffineExpr::var(sinr.start + v).add_constant(1.0), ConstraintTag::user(Family::CommonDecoding, u));
        }
        for (u, b) in beta.clone().enumerate() {
            p.geq0(AffineExpr::var(b), ConstraintTag::user(Family::Nonnegativity, u));
        }
    } else {
        for idx in yb.all(1) {
            p.eq0(AffineExpr::var(idx), ConstraintTag::aux());
        }
    }
    p.soc(AffineExpr::constant(cfg.power_budget.sqrt()), y.clone().map(AffineExpr::var).collect(), ConstraintTag::global(Family::PowerBudget));

    let radar = ConstraintTag::global(Family::Beampattern);
    match settings.radar {
        RadarSurrogate::Inner => {
            for (l, target) in cfg.targets.iter().enumerate() {
                let a = steering_vector(target.angle, m, cfg.spacing_ratio, false)?;
                let d = AffineExpr::var(radar_gap.start + l);
                p.square_epigraph(d.clone().add_constant(target.level), yb.components(&a, 0..=k, 1.0), radar);
                let q_lin = (0..=k).fold(AffineExpr::default(), |e, j| e.plus(&yb.gain_tangent(&a, j, inner(&a, yr.column(j)))));
                p.geq(d, &q_lin.scaled(-1.0).add_constant(target.level), radar);
            }
            let gaps = radar_gap.clone().map(AffineExpr::var).collect();
            p.soc(AffineExpr::constant(cfg.beampattern_tolerance.sqrt()), gaps, radar);
        }
        RadarSurrogate::Tangent => {
            let s = beampattern_surrogate(BeampatternVariable::Beamformers { reference: yr }, &cfg.targets, cfg.spacing_ratio)?;
            let expr = s.gradient.iter().zip(&s.reference_point).enumerate().fold(
                AffineExpr::constant(s.value_at_ref),
                |e, (n, (g, r))| e.add_term(y.start + n, *g).add_constant(-g * r),
            );
            p.geq0(expr.scaled(-1.0).add_constant(cfg.beampattern_tolerance), radar);
        }
    }

    for idx in y.clone() {
        p.add_quadratic(idx, idx, 1.0);
    }
    let fixed_power = cfg.fixed_power();
    let mut objective = AffineExpr::constant(fixed_power);
    for b in beta.clone() {
        objective = objective.add_term(b, -1.0 / tau);
    }
    for (n, w) in weights.iter().enumerate() {
        objective = objective.add_term(log_rate.start + n, -w / (tau * LN_2));
    }
    p.linear_objective = objective;
    p.validate()?;
    Ok(BeamformingProgram {
        program: p,
        layout: BeamformingLayout { beamformers: y, common_rates: beta, sinr, interference: iota, log_rate, radar_gap },
        tau,
        num_antennas: m,
        num_users: k,
        private_vars,
        weights,
        fixed_power,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingOutcome {
    pub point: Point,
    pub eval: Evaluation,
    /// `tau` of the last inner loop.
    pub final_tau: f64,
    /// `phi` at the last inner iteration.
    pub final_phi: f64,
    pub sca_iterations: usize,
    pub converged: bool,
}

/// SCA over references (outer) with a Dinkelbach loop per reference (inner).
/// `start` must satisfy the true constraints.
pub fn dinkelbach_beamforming(
    inst: &Instance,
    channels: &Channels,
    start: &Point,
    settings: &SolverSettings,
    trace: &mut SolveTrace,
    outer: usize,
) -> Result<BeamformingOutcome> {
    settings.validate()?;
    let tol = settings.feasibility_tolerance;
    let mut current = start.clone();
    let mut eval = inst.evaluate_with(channels, &current)?;
    if !eval.feasible(tol) {
        return Err(Error::Infeasible(format!(
            "beamforming start violates constraints by {:.3e}",
            eval.report.max_residual()
        )));
    }
    let fixed = inst.cfg.fixed_power();
    let mut final_tau = eval.ee();
    let mut final_phi = 0.0;
    let mut converged = false;
    let mut sca_iterations = 0;
    for sca in 1..=settings.max_sca_iters {
        sca_iterations = sca;
        let reference = beamforming_reference(inst, channels, &current)?;
        let mut tau = eval.ee();
        let mut best = None;
        // The last accepted solution, feasible for every program of this loop.
        let mut incumbent = BeamformingCandidate {
            beamformers: reference.point.beamformers.clone(),
            common_rates: reference.point.common_rates.clone(),
            sinr: reference.sinr.clone(),
            surrogate_rate: eval.metrics.sum_rate,
            transmit_power: eval.metrics.transmit_power,
            phi: 0.0,
        };
        for d in 1..=settings.max_dinkelbach_iters {
            let program = build_beamforming_program(inst, channels, &reference, tau, settings)?;
            let sol = trace.solve(&program.program, &settings.conic)?;
            if !trace.usable(&program.program, &sol, Stage::Beamforming, outer) {
                break;
            }
            let mut cand = program.extract(&sol.x)?;
            // Interior-point slack can leave the solve marginally worse than
            // the incumbent; keep the incumbent then.
            incumbent.phi = incumbent.transmit_power + fixed - incumbent.surrogate_rate / tau;
            if cand.phi > incumbent.phi {
                cand = incumbent.clone();
            }
            final_phi = cand.phi;
            final_tau = tau;
            trace.push(TraceRecord {
                stage: Stage::Beamforming,
                outer,
                sca,
                dinkelbach: d,
                objective: cand.phi,
                tau: Some(tau),
                energy_efficiency: cand.surrogate_rate / (cand.transmit_power + fixed),
                transmit_power: cand.transmit_power,
                max_residual: program.program.max_violation(&sol.x),
                damping: 0,
                elapsed_s: 0.0,
            });
            let next = cand.surrogate_rate / (cand.transmit_power + fixed);
            let done = cand.phi >= -settings.dinkelbach_tolerance || next <= tau;
            incumbent = cand.clone();
            best = Some(cand);
            if done {
                break;
            }
            if d == settings.max_dinkelbach_iters {
                trace.diagnostics.push(Diagnostic::IterationCap { stage: Stage::Beamforming, outer });
            }
            tau = next;
        }
        let Some(cand) = best else { break };
        let base = &reference.point;
        let damped = damp(settings.damping_limit, tol, eval.ee(), |w| {
            let beta: Vec<f64> = base.common_rates.iter().zip(&cand.common_rates).map(|(a, b)| a + (b - a) * w).collect();
            let p = Point { uav_xy: base.uav_xy, beamformers: base.beamformers.lerp(&cand.beamformers, w), common_rates: beta };
            let e = inst.evaluate_with(channels, &p)?;
            Ok((p, e))
        })?;
        let Some(step) = damped else {
            // The program predicts `final_tau`; a negligible predicted gain is convergence.
            if final_tau - eval.ee() <= settings.sca_tolerance * eval.ee() {
                converged = true;
            } else {
                trace.diagnostics.push(Diagnostic::DampingExhausted { stage: Stage::Beamforming, outer });
            }
            break;
        };
        if let Some(last) = trace.records.last_mut() {
            last.damping = step.halvings;
        }
        let gain = (step.eval.ee() - eval.ee()) / eval.ee().max(f64::MIN_POSITIVE);
        current = step.value;
        eval = step.eval;
        if gain < settings.sca_tolerance {
            converged = true;
            break;
        }
    }
    Ok(BeamformingOutcome { point: current, eval, final_tau, final_phi, sca_iterations, converged })
}
