//! Small-instance comparison of the subproblem solvers with the brute-force
//! oracles.

use rsma_uav::model::default_radar_level;
use rsma_uav::oracle::{grid_search_location, random_feasible_sampler, raw_channels};
use rsma_uav::scalar::dbm_to_watts;
use rsma_uav::scheme::Scheme;
use rsma_uav::subproblems::{
    dinkelbach_beamforming, initial_point, restore_feasibility, sca_location, Instance, SolveTrace, SolverSettings,
};
use rsma_uav::Config;

use crate::error::{HarnessError, Result};
use crate::scenario::generate_scenario;

/// Placement must reach this share of the grid optimum.
pub const LOCATION_RATIO: f64 = 0.95;
/// Beamforming may fall this far (relative) below the best random sample.
pub const SAMPLER_SLACK: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub seed: u64,
    pub location_objective: f64,
    pub grid_objective: f64,
    pub beamforming_ee: f64,
    pub sampler_ee: f64,
    pub feasible_samples: usize,
}

impl OracleCheck {
    pub fn location_passes(&self) -> bool {
        self.location_objective >= LOCATION_RATIO * self.grid_objective
    }

    pub fn beamforming_passes(&self) -> bool {
        self.beamforming_ee >= (1.0 - SAMPLER_SLACK) * self.sampler_ee
    }

    pub fn passes(&self) -> bool {
        self.location_passes() && self.beamforming_passes()
    }
}

/// The default scenario shrunk to two antennas and two users.
pub fn small_config() -> Config {
    let mut cfg = Config::default_scenario();
    cfg.num_antennas = 2;
    cfg.num_users = 2;
    cfg.qos_thresholds = vec![cfg.qos_thresholds[0]; 2];
    cfg.targets[0].level = default_radar_level(
        rsma_uav::model::DEFAULT_RADAR_LEVEL_RATIO,
        dbm_to_watts(rsma_uav::model::DEFAULT_RADAR_REFERENCE_DBM),
        2,
    );
    cfg
}

/// From the restored starting point of each seed: placement SCA against the
/// exhaustive grid with the same precoder and split, and Dinkelbach
/// beamforming against random sampling at the same position.
pub fn oracle_suite(cfg: &Config, seeds: &[u64], samples: usize, grid_step: f64, settings: &SolverSettings) -> Result<Vec<OracleCheck>> {
    let mut out = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let (users, _) = generate_scenario(cfg, seed);
        let inst = Instance::new(cfg.clone(), users.clone(), Scheme::Rsma)?;
        let init = initial_point(&inst)?;
        let channels = inst.channels(init.uav_xy)?;
        let mut trace = SolveTrace::new();
        let (start, ok) = restore_feasibility(&inst, &channels, &init, settings, &mut trace)?;
        if !ok {
            return Err(HarnessError::Spec(format!("seed {seed}: no feasible starting point")));
        }
        let placed = sca_location(&inst, &start, settings, &mut trace, 1)?;
        let grid = grid_search_location(cfg, &users, &start.beamformers, &start.common_rates, grid_step)?
            .ok_or_else(|| HarnessError::Spec(format!("seed {seed}: grid has no feasible point")))?;
        let beams = dinkelbach_beamforming(&inst, &channels, &start, settings, &mut trace, 1)?;
        let sampled = random_feasible_sampler(cfg, &raw_channels(cfg, &users, start.uav_xy), samples, seed)?;
        out.push(OracleCheck {
            seed,
            location_objective: placed.objective,
            grid_objective: grid.objective,
            beamforming_ee: beams.eval.ee(),
            sampler_ee: sampled.as_ref().map_or(0.0, |s| s.energy_efficiency),
            feasible_samples: sampled.map_or(0, |s| s.feasible_samples),
        });
    }
    Ok(out)
}
