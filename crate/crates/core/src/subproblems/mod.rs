//! The two convex subproblems and the loops that drive them.
//!
//! * [`location`]: UAV placement by SCA with the beamformer and split fixed.
//! * [`beamforming`]: beamformer and split by SCA with an inner Dinkelbach loop.
//! * [`restoration`]: initial point and feasibility restoration.
//! * [`alternating`]: the outer loop alternating the two.
//!
//! Every step is accepted only if the true constraints hold and the true
//! energy efficiency does not drop; otherwise it is halved toward the
//! reference, at most `damping_limit` times.

mod alternating;
mod beamforming;
mod expr;
mod location;
mod restoration;

use std::time::Instant;

use serde::Serialize;

pub use alternating::{alternating_optimize, Solution};
pub use beamforming::{
    beamforming_reference, build_beamforming_program, dinkelbach_beamforming, BeamformingCandidate,
    BeamformingOutcome, BeamformingProgram, BeamformingReference,
};
pub use location::{build_location_program, location_reference, sca_location, LocationOutcome, LocationProgram, LocationReference};
pub use restoration::{initial_point, restore_feasibility};

use crate::error::{Error, Result};
use crate::model::{ChannelSet, FeasibilityReport};
use crate::scheme::{evaluate, feasibility, LinkSet, Scheme, SchemeMetrics};
use crate::solver::{solve_convex, ConicSettings, ConicSolution, SolveStatus};
use crate::program::ConvexProgram;
use crate::{Channels, Config, Point, User};

/// How the beampattern constraint enters the beamforming program.
const SALVAGE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RadarSurrogate {
    /// `|q_l - zeta_l| <= d_l`, `||d|| <= sqrt(delta)` with `q_l` kept
    /// convex on one side and linearized on the other; every solution
    /// satisfies the true constraint.
    Inner,
    /// First-order expansion of the MSE; only locally valid.
    Tangent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverSettings {
    pub sca_tolerance: f64,
    pub dinkelbach_tolerance: f64,
    /// Relative EE change that stops the alternating loop.
    pub outer_tolerance: f64,
    pub max_sca_iters: usize,
    pub max_dinkelbach_iters: usize,
    pub max_outer_iters: usize,
    pub damping_limit: usize,
    /// Residual accepted by the true-constraint check.
    pub feasibility_tolerance: f64,
    pub max_restoration_iters: usize,
    pub radar: RadarSurrogate,
    #[serde(skip)]
    pub conic: ConicSettings,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            sca_tolerance: 1e-6,
            dinkelbach_tolerance: 1e-6,
            outer_tolerance: 1e-4,
            max_sca_iters: 50,
            max_dinkelbach_iters: 30,
            max_outer_iters: 30,
            damping_limit: 20,
            feasibility_tolerance: 1e-7,
            max_restoration_iters: 30,
            radar: RadarSurrogate::Inner,
            conic: ConicSettings::default(),
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        let tolerances = [self.sca_tolerance, self.dinkelbach_tolerance, self.outer_tolerance, self.feasibility_tolerance];
        if tolerances.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        let caps = [self.max_sca_iters, self.max_dinkelbach_iters, self.max_outer_iters, self.max_restoration_iters];
        if caps.contains(&0) {
            return Err(Error::InvalidArgument("iteration caps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stage {
    Restoration,
    Location,
    Beamforming,
    Outer,
}

/// One row of the convergence log.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub stage: Stage,
    pub outer: usize,
    /// SCA reference index inside the stage.
    pub sca: usize,
    /// Dinkelbach index inside one SCA reference (0 elsewhere).
    pub dinkelbach: usize,
    /// Stage objective: sum rate (location), `phi` (Dinkelbach), EE (outer),
    /// total slack (restoration).
    pub objective: f64,
    pub tau: Option<f64>,
    pub energy_efficiency: f64,
    pub transmit_power: f64,
    pub max_residual: f64,
    pub damping: usize,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Diagnostic {
    RestorationFailed { max_residual: f64 },
    DampingExhausted { stage: Stage, outer: usize },
    SolverFailure { stage: Stage, outer: usize, status: String },
    IterationCap { stage: Stage, outer: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveTrace {
    pub records: Vec<TraceRecord>,
    pub diagnostics: Vec<Diagnostic>,
    /// Conic programs handed to the solver.
    pub solve_count: usize,
    #[serde(skip)]
    started: Option<Instant>,
}

impl Default for SolveTrace {
    fn default() -> Self {
        Self::new()
    }
}

impl SolveTrace {
    pub fn new() -> Self {
        Self { records: Vec::new(), diagnostics: Vec::new(), solve_count: 0, started: Some(Instant::now()) }
    }

    pub fn elapsed(&self) -> f64 {
        self.started.map_or(0.0, |s| s.elapsed().as_secs_f64())
    }

    pub fn stage(&self, stage: Stage) -> impl Iterator<Item = &TraceRecord> + '_ {
        self.records.iter().filter(move |r| r.stage == stage)
    }

    /// Energy efficiency after each outer iteration (entry 0 is the start).
    pub fn outer_ee(&self) -> Vec<f64> {
        self.stage(Stage::Outer).map(|r| r.energy_efficiency).collect()
    }

    pub(crate) fn solve(&mut self, program: &ConvexProgram, settings: &ConicSettings) -> Result<ConicSolution> {
        self.solve_count += 1;
        solve_convex(program, settings)
    }

    /// Accepts a solve that stopped early when its iterate still satisfies the
    /// program; the true-constraint gate downstream rejects bad steps anyway.
    pub(crate) fn usable(&mut self, program: &ConvexProgram, sol: &ConicSolution, stage: Stage, outer: usize) -> bool {
        if sol.status.is_usable() {
            return true;
        }
        let salvage = matches!(sol.status, SolveStatus::IterationLimit | SolveStatus::NumericalFailure)
            && sol.x.len() == program.num_vars
            && sol.x.iter().all(|v| v.is_finite())
            && program.max_violation(&sol.x) <= SALVAGE_TOLERANCE;
        if !salvage {
            self.diagnostics.push(Diagnostic::SolverFailure { stage, outer, status: format!("{:?}", sol.status) });
        }
        salvage
    }

    pub(crate) fn push(&mut self, mut record: TraceRecord) {
        record.elapsed_s = self.elapsed();
        self.records.push(record);
    }
}

/// Scenario plus the scheme-specific decoding structure.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub cfg: Config,
    pub users: Vec<User>,
    pub links: LinkSet,
}

/// True metrics and residuals of a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub metrics: SchemeMetrics,
    pub report: FeasibilityReport<f64>,
}

impl Evaluation {
    pub fn feasible(&self, tolerance: f64) -> bool {
        self.report.is_feasible(tolerance)
    }

    pub fn ee(&self) -> f64 {
        self.metrics.energy_efficiency
    }
}

impl Instance {
    /// The NOMA decoding order is fixed from the channel gains seen from the
    /// user centroid.
    pub fn new(cfg: Config, users: Vec<User>, scheme: Scheme) -> Result<Self> {
        cfg.validate()?;
        if users.len() != cfg.num_users {
            return Err(Error::DimensionMismatch(format!("{} users for K = {}", users.len(), cfg.num_users)));
        }
        let z0 = centroid(&users);
        let channels = ChannelSet::new(&cfg, z0, &users)?;
        let gains: Vec<f64> = (0..users.len()).map(|k| channels.gain(k)).collect();
        let links = LinkSet::new(scheme, &gains)?;
        Ok(Self { cfg, users, links })
    }

    pub fn scheme(&self) -> Scheme {
        self.links.scheme
    }

    pub fn channels(&self, z: [f64; 2]) -> Result<Channels> {
        ChannelSet::new(&self.cfg, z, &self.users)
    }

    pub fn evaluate_with(&self, channels: &Channels, point: &Point) -> Result<Evaluation> {
        let metrics = evaluate(&self.links, &self.cfg, channels, point)?;
        let report = feasibility(&self.links, &self.cfg, &metrics, point);
        Ok(Evaluation { metrics, report })
    }

    pub fn evaluate(&self, point: &Point) -> Result<Evaluation> {
        self.evaluate_with(&self.channels(point.uav_xy)?, point)
    }

    pub fn centroid(&self) -> [f64; 2] {
        centroid(&self.users)
    }
}

pub fn centroid(users: &[User]) -> [f64; 2] {
    let n = users.len().max(1) as f64;
    let (x, y) = users.iter().fold((0.0, 0.0), |(x, y), u| (x + u.position[0], y + u.position[1]));
    [x / n, y / n]
}

/// Channels divided by the noise amplitude so the noise power becomes 1.
pub(crate) fn normalized(channels: &Channels, noise: f64) -> Vec<Vec<crate::Cplx>> {
    let s = noise.sqrt().recip();
    channels.channels.iter().map(|h| h.iter().map(|v| v * s).collect()).collect()
}

/// Outcome of the halving search between an accepted reference and a candidate.
pub(crate) struct Damped<T> {
    pub value: T,
    pub eval: Evaluation,
    pub halvings: usize,
}

/// Returns the first of `candidate, mid(ref, candidate), ...` that is feasible
/// and does not lower the energy efficiency, or `None` after `limit` halvings.
pub(crate) fn damp<T>(
    limit: usize,
    tolerance: f64,
    reference_ee: f64,
    mut at: impl FnMut(f64) -> Result<(T, Evaluation)>,
) -> Result<Option<Damped<T>>> {
    let mut weight = 1.0;
    for halvings in 0..=limit {
        let (value, eval) = at(weight)?;
        if eval.feasible(tolerance) && eval.ee() >= reference_ee {
            return Ok(Some(Damped { value, eval, halvings }));
        }
        weight *= 0.5;
    }
    Ok(None)
}
