#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rsma_uav::model::{aod_from_geometry, default_radar_level, UserTerminal};
use rsma_uav::scalar::dbm_to_watts;
use rsma_uav::scheme::Scheme;
use rsma_uav::subproblems::{centroid, initial_point, restore_feasibility, Instance, SolveTrace, SolverSettings};
use rsma_uav::{Config, Cplx, Point, User};

/// The default scenario with `m` antennas and `k` users; the radar level follows `m`.
pub fn config(m: usize, k: usize) -> Config {
    let mut cfg = Config::default_scenario();
    cfg.num_antennas = m;
    cfg.num_users = k;
    cfg.qos_thresholds = vec![1.0; k];
    cfg.targets[0].level = default_radar_level(0.5, dbm_to_watts(23.0), m);
    cfg
}

/// Uniform users with CN(0,1) fading and AoDs seen from their centroid.
pub fn users(cfg: &Config, seed: u64) -> Vec<User> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut users: Vec<User> = (0..cfg.num_users)
        .map(|_| {
            let position = [rng.gen_range(0.0..cfg.area_side), rng.gen_range(0.0..cfg.area_side)];
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            UserTerminal { position, fading: Cplx::new(re, im) * std::f64::consts::FRAC_1_SQRT_2, aod: 0.0 }
        })
        .collect();
    let z = centroid(&users);
    for u in &mut users {
        u.aod = aod_from_geometry(cfg.uav_height, z, u.position);
    }
    users
}

pub fn instance(m: usize, k: usize, seed: u64, scheme: Scheme) -> Instance {
    let cfg = config(m, k);
    let users = users(&cfg, seed);
    Instance::new(cfg, users, scheme).unwrap()
}

/// Restored feasible starting point.
pub fn feasible_start(inst: &Instance) -> Point {
    let settings = SolverSettings::default();
    let init = initial_point(inst).unwrap();
    let channels = inst.channels(init.uav_xy).unwrap();
    let (p, ok) = restore_feasibility(inst, &channels, &init, &settings, &mut SolveTrace::new()).unwrap();
    assert!(ok, "restoration failed");
    p
}
