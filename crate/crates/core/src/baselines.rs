//! RSMA and its NOMA/OMA comparators under identical channels, budget, QoS
//! and radar constraints.
//!
//! All three run the same alternating optimization; only the decoding
//! links differ (see [`crate::scheme`]).

use crate::error::Result;
use crate::scheme::{Scheme, SchemeMetrics};
use crate::subproblems::{alternating_optimize, initial_point, Instance, Solution, SolveTrace, SolverSettings};
use crate::{Config, Point, User};

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeResult {
    pub scheme: Scheme,
    /// `beta` is all zeros and column 0 vanishes for NOMA and OMA.
    pub point: Point,
    pub metrics: SchemeMetrics,
    pub trace: SolveTrace,
    pub feasible: bool,
    pub converged: bool,
    pub final_tau: f64,
    pub final_phi: f64,
}

impl SchemeResult {
    fn from_solution(scheme: Scheme, sol: Solution) -> Self {
        Self {
            scheme,
            point: sol.point,
            metrics: sol.eval.metrics,
            trace: sol.trace,
            feasible: sol.feasible,
            converged: sol.converged,
            final_tau: sol.final_tau,
            final_phi: sol.final_phi,
        }
    }

    pub fn energy_efficiency(&self) -> f64 {
        self.metrics.energy_efficiency
    }
}

/// Runs `scheme` from `init`, or from [`initial_point`] when `None`.
/// A warm start from another scheme has its common part cleared first.
pub fn solve_scheme(
    cfg: &Config,
    users: &[User],
    scheme: Scheme,
    settings: &SolverSettings,
    init: Option<&Point>,
) -> Result<SchemeResult> {
    let inst = Instance::new(cfg.clone(), users.to_vec(), scheme)?;
    let start = match init {
        Some(p) if inst.links.uses_common() => p.clone(),
        Some(p) => {
            let mut p = p.clone();
            p.common_rates.iter_mut().for_each(|b| *b = 0.0);
            p.beamformers.column_mut(0).iter_mut().for_each(|v| *v = crate::Cplx::new(0.0, 0.0));
            p
        }
        None => initial_point(&inst)?,
    };
    let sol = alternating_optimize(&inst, &start, settings)?;
    Ok(SchemeResult::from_solution(scheme, sol))
}

pub fn solve_rsma(cfg: &Config, users: &[User], settings: &SolverSettings) -> Result<SchemeResult> {
    solve_scheme(cfg, users, Scheme::Rsma, settings, None)
}

/// Gain-ordered SIC, no common stream.
pub fn solve_noma(cfg: &Config, users: &[User], settings: &SolverSettings) -> Result<SchemeResult> {
    solve_scheme(cfg, users, Scheme::Noma, settings, None)
}

/// Equal time slots with the slot-averaged beampattern.
pub fn solve_oma(cfg: &Config, users: &[User], settings: &SolverSettings) -> Result<SchemeResult> {
    solve_scheme(cfg, users, Scheme::Oma, settings, None)
}
