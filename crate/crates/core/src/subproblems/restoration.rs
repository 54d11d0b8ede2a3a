//! Starting point and feasibility restoration.

use super::expr::BeamBlock;
use super::{normalized, Diagnostic, Instance, SolveTrace, SolverSettings, Stage, TraceRecord};
use crate::error::Result;
use crate::linearize::{devectorize, rotate_beamformer};
use crate::model::{inner, steering_vector};
use crate::program::{AffineExpr, ConstraintTag, ConvexProgram};
use crate::scheme::RateRole;
use crate::{Beams, Channels, Cplx, Point};

/// Share of the budget used by the initial precoder.
const INITIAL_POWER_SHARE: f64 = 0.9;
/// Weight of the proximal term keeping restoration steps short.
const PROXIMAL_WEIGHT: f64 = 1.0;
/// Weight of the radar slack relative to the QoS slacks.
const RADAR_SLACK_WEIGHT: f64 = 10.0;

/// UAV above the user centroid, equal-power maximum-ratio columns using 90%
/// of the budget, the common column along the strongest channel and 90% of
/// the resulting common rate split evenly.
pub fn initial_point(inst: &Instance) -> Result<Point> {
    let cfg = &inst.cfg;
    let z = inst.centroid();
    let channels = inst.channels(z)?;
    let k = cfg.num_users;
    let active = if inst.links.uses_common() { k + 1 } else { k };
    let amplitude = (INITIAL_POWER_SHARE * cfg.power_budget / active as f64).sqrt();
    let mrt = |h: &[Cplx]| -> Vec<Cplx> {
        let n = h.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if n == 0.0 {
            vec![Cplx::new(0.0, 0.0); h.len()]
        } else {
            h.iter().map(|v| v * (amplitude / n)).collect()
        }
    };
    let mut cols = vec![vec![Cplx::new(0.0, 0.0); cfg.num_antennas]];
    cols.extend(channels.channels.iter().map(|h| mrt(h)));
    if inst.links.uses_common() {
        let strongest = (0..k).fold(0, |b, u| if channels.gain(u) > channels.gain(b) { u } else { b });
        cols[0] = mrt(&channels.channels[strongest]);
    }
    let mut point = Point { uav_xy: z, beamformers: Beams::from_columns(cols)?, common_rates: vec![0.0; k] };
    if inst.links.uses_common() {
        let rc = inst.evaluate_with(&channels, &point)?.metrics.common_rate;
        point.common_rates = vec![INITIAL_POWER_SHARE * rc / k as f64; k];
    }
    Ok(point)
}

/// Returns `start` if it is feasible; otherwise drops the common split and
/// runs convex restoration programs (exact SOC form for links whose column
/// can be rotated, tangent form for the others, slacked radar bound, a
/// proximal term) until the true constraints hold. The flag reports success.
pub fn restore_feasibility(
    inst: &Instance,
    channels: &Channels,
    start: &Point,
    settings: &SolverSettings,
    trace: &mut SolveTrace,
) -> Result<(Point, bool)> {
    let tol = settings.feasibility_tolerance;
    let eval = inst.evaluate_with(channels, start)?;
    if eval.feasible(tol) {
        return Ok((start.clone(), true));
    }
    let cfg = &inst.cfg;
    let links = &inst.links;
    let (m, k) = (cfg.num_antennas, cfg.num_users);
    let hn = normalized(channels, cfg.noise_power);
    let mut current = Point { common_rates: vec![0.0; k], ..start.clone() };
    let mut residual = eval.report.max_residual();
    for it in 1..=settings.max_restoration_iters {
        let yr = rotate_beamformer(&current.beamformers, channels);
        let mut p = ConvexProgram::new();
        let y = p.add_block("beamformers", 2 * m * (k + 1));
        let slack = p.add_block("qos_slack", links.links.len());
        let radar_slack = p.add_block("radar_slack", 1).start;
        let gap = p.add_block("radar_gap", cfg.targets.len());
        let yb = BeamBlock { offset: y.start, num_antennas: m };
        for (li, link) in links.links.iter().enumerate() {
            let var = &links.vars[link.var];
            let need = (cfg.qos_thresholds[var.user] / var.weight).exp2() - 1.0;
            let r = AffineExpr::var(slack.start + li);
            p.geq0(r.clone(), ConstraintTag::aux());
            if var.role != RateRole::Private || need <= 0.0 {
                continue;
            }
            let h = &hn[link.user];
            let g = link.gain;
            let mut interference = yb.components(h, link.interferers.iter().copied(), g.sqrt());
            if link.aligned {
                interference.push(AffineExpr::constant(1.0));
                let [re, _] = yb.inner(h, link.desired, (g / need).sqrt());
                p.soc(re.plus(&r), interference, ConstraintTag::aux());
            } else {
                let gain = inner(h, yr.column(link.desired));
                let lhs = yb.gain_tangent(h, link.desired, gain).scaled(g / need).plus(&r).add_constant(-1.0);
                p.square_epigraph(lhs, interference, ConstraintTag::aux());
            }
        }
        for (l, target) in cfg.targets.iter().enumerate() {
            let a = steering_vector(target.angle, m, cfg.spacing_ratio, false)?;
            let d = AffineExpr::var(gap.start + l);
            p.square_epigraph(d.clone().add_constant(target.level), yb.components(&a, 0..=k, 1.0), ConstraintTag::aux());
            let q_lin = (0..=k).fold(AffineExpr::default(), |e, j| e.plus(&yb.gain_tangent(&a, j, inner(&a, yr.column(j)))));
            p.geq(d, &q_lin.scaled(-1.0).add_constant(target.level), ConstraintTag::aux());
        }
        p.geq0(AffineExpr::var(radar_slack), ConstraintTag::aux());
        p.soc(
            AffineExpr::var(radar_slack).add_constant(cfg.beampattern_tolerance.sqrt()),
            gap.clone().map(AffineExpr::var).collect(),
            ConstraintTag::aux(),
        );
        p.soc(AffineExpr::constant(cfg.power_budget.sqrt()), y.clone().map(AffineExpr::var).collect(), ConstraintTag::aux());
        if !links.uses_common() {
            for idx in yb.all(1) {
                p.eq0(AffineExpr::var(idx), ConstraintTag::aux());
            }
        }
        let reference = crate::linearize::vectorize(&yr);
        let mut objective = slack.clone().fold(AffineExpr::default(), |e, s| e.add_term(s, 1.0)).add_term(radar_slack, RADAR_SLACK_WEIGHT);
        for (n, idx) in y.clone().enumerate() {
            p.add_quadratic(idx, idx, PROXIMAL_WEIGHT);
            objective = objective.add_term(idx, -2.0 * PROXIMAL_WEIGHT * reference[n]);
            objective = objective.add_constant(PROXIMAL_WEIGHT * reference[n] * reference[n]);
        }
        p.linear_objective = objective;
        let sol = trace.solve(&p, &settings.conic)?;
        if !trace.usable(&p, &sol, Stage::Restoration, 0) {
            break;
        }
        let mut beams = devectorize(&sol.x[y.clone()], m, k)?;
        if !links.uses_common() {
            beams.column_mut(0).iter_mut().for_each(|c| *c = Cplx::new(0.0, 0.0));
        }
        current.beamformers = beams;
        let eval = inst.evaluate_with(channels, &current)?;
        residual = eval.report.max_residual();
        let total_slack: f64 = sol.x[slack.clone()].iter().sum::<f64>() + sol.x[radar_slack];
        trace.push(TraceRecord {
            stage: Stage::Restoration,
            outer: 0,
            sca: it,
            dinkelbach: 0,
            objective: total_slack,
            tau: None,
            energy_efficiency: eval.ee(),
            transmit_power: eval.metrics.transmit_power,
            max_residual: residual,
            damping: 0,
            elapsed_s: 0.0,
        });
        if eval.feasible(tol) {
            return Ok((current, true));
        }
    }
    trace.diagnostics.push(Diagnostic::RestorationFailed { max_residual: residual });
    Ok((current, false))
}
