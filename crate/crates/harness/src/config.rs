//! Scenario files.
//!
//! A scenario is a TOML table whose keys all have defaults, so an empty
//! file is valid. Quantities given in dBm or dB carry a `_dbm`/`_db` suffix;
//! the same quantity may instead be given linearly (watts or ratio) under
//! the unsuffixed name, but not both.
//!
//! | key | default | meaning |
//! |---|---|---|
//! | `num_antennas` | 8 | ULA size `M` |
//! | `num_users` | 4 | `K` |
//! | `spacing_ratio` | 0.5 | element spacing over wavelength |
//! | `uav_height_m` | 50 | flight altitude |
//! | `pathloss_exponent` | 2 | `gamma` |
//! | `noise_dbm` / `noise_w` | -50 dBm | `sigma^2` |
//! | `p_max_dbm` / `p_max_w` | 26 dBm | transmit budget |
//! | `fixed_power_dbm` / `fixed_power_w` | 30 dBm | hover plus circuit power |
//! | `dynamic_per_chain_w` | 0.05 | per-RF-chain draw |
//! | `static_power_w` | 0.1 | static draw |
//! | `qos_bps_hz` | 1.0 | per-user threshold, scalar or list of `K` |
//! | `delta_db` / `delta` | -20 dB | beampattern MSE tolerance |
//! | `area_side_m` | 50 | side of the service square |
//! | `radar_level_ratio` | 0.5 | `eta` in the default level `eta M P_ref` |
//! | `radar_reference_dbm` | 23 | `P_ref` |
//! | `targets` | one at 0 deg | array of `{ angle_deg, level_w? }` |
//! | `seed` | 0 | scenario seed stored in the config |
//!
//! The hover power is whatever remains of the fixed power after the
//! circuit draw `M P_dyn + P_sta`.

use std::path::Path;

use rsma_uav::model::{default_radar_level, PowerModel, RadarTarget};
use rsma_uav::scalar::{db_to_linear, dbm_to_watts};
use rsma_uav::Config;
use serde::Deserialize;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub num_antennas: Option<usize>,
    pub num_users: Option<usize>,
    pub spacing_ratio: Option<f64>,
    pub uav_height_m: Option<f64>,
    pub pathloss_exponent: Option<f64>,
    pub noise_dbm: Option<f64>,
    pub noise_w: Option<f64>,
    pub p_max_dbm: Option<f64>,
    pub p_max_w: Option<f64>,
    pub fixed_power_dbm: Option<f64>,
    pub fixed_power_w: Option<f64>,
    pub dynamic_per_chain_w: Option<f64>,
    pub static_power_w: Option<f64>,
    pub qos_bps_hz: Option<Qos>,
    pub delta_db: Option<f64>,
    pub delta: Option<f64>,
    pub area_side_m: Option<f64>,
    pub radar_level_ratio: Option<f64>,
    pub radar_reference_dbm: Option<f64>,
    pub targets: Option<Vec<TargetEntry>>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Qos {
    Uniform(f64),
    PerUser(Vec<f64>),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetEntry {
    pub angle_deg: f64,
    pub level_w: Option<f64>,
}

fn pick(key: &str, log: Option<f64>, linear: Option<f64>, to_linear: fn(f64) -> f64, default: f64) -> std::result::Result<f64, String> {
    match (log, linear) {
        (Some(_), Some(_)) => Err(format!("`{key}` given both in log units and linearly")),
        (Some(v), None) => Ok(to_linear(v)),
        (None, Some(v)) => Ok(v),
        (None, None) => Ok(default),
    }
}

impl ScenarioFile {
    /// Fills the gaps with the default scenario and converts to linear units.
    pub fn resolve(&self) -> std::result::Result<Config, String> {
        let base = Config::default_scenario();
        let m = self.num_antennas.unwrap_or(base.num_antennas);
        let k = self.num_users.unwrap_or(base.num_users);
        let dynamic = self.dynamic_per_chain_w.unwrap_or(base.power.dynamic_per_chain);
        let static_power = self.static_power_w.unwrap_or(base.power.static_power);
        let fixed = pick("fixed_power", self.fixed_power_dbm, self.fixed_power_w, dbm_to_watts, base.fixed_power())?;
        let circuit = m as f64 * dynamic + static_power;
        if fixed < circuit {
            return Err(format!("fixed power {fixed} W is below the circuit draw {circuit} W"));
        }
        let qos = match &self.qos_bps_hz {
            None => vec![base.qos_thresholds[0]; k],
            Some(Qos::Uniform(v)) => vec![*v; k],
            Some(Qos::PerUser(v)) if v.len() == k => v.clone(),
            Some(Qos::PerUser(v)) => return Err(format!("`qos_bps_hz` lists {} values for {k} users", v.len())),
        };
        let ratio = self.radar_level_ratio.unwrap_or(rsma_uav::model::DEFAULT_RADAR_LEVEL_RATIO);
        let reference = dbm_to_watts(self.radar_reference_dbm.unwrap_or(rsma_uav::model::DEFAULT_RADAR_REFERENCE_DBM));
        let default_level = default_radar_level(ratio, reference, m);
        let targets = match &self.targets {
            None => vec![RadarTarget { angle: 0.0, level: default_level }],
            Some(list) => list
                .iter()
                .map(|t| RadarTarget { angle: t.angle_deg.to_radians(), level: t.level_w.unwrap_or(default_level) })
                .collect(),
        };
        let cfg = Config {
            num_antennas: m,
            num_users: k,
            spacing_ratio: self.spacing_ratio.unwrap_or(base.spacing_ratio),
            uav_height: self.uav_height_m.unwrap_or(base.uav_height),
            pathloss_exponent: self.pathloss_exponent.unwrap_or(base.pathloss_exponent),
            noise_power: pick("noise", self.noise_dbm, self.noise_w, dbm_to_watts, base.noise_power)?,
            power_budget: pick("p_max", self.p_max_dbm, self.p_max_w, dbm_to_watts, base.power_budget)?,
            power: PowerModel { hover: fixed - circuit, dynamic_per_chain: dynamic, static_power },
            qos_thresholds: qos,
            targets,
            beampattern_tolerance: pick("delta", self.delta_db, self.delta, db_to_linear, base.beampattern_tolerance)?,
            area_side: self.area_side_m.unwrap_or(base.area_side),
            rng_seed: self.seed.unwrap_or(base.rng_seed),
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }
}

/// Parses a scenario from TOML text; `origin` only labels errors.
pub fn parse_config(text: &str, origin: &Path) -> Result<Config> {
    let err = |message: String| HarnessError::Config { path: origin.to_path_buf(), message };
    let file: ScenarioFile = toml::from_str(text).map_err(|e| err(e.to_string()))?;
    file.resolve().map_err(err)
}

pub fn load_config(path: impl AsRef<Path>) -> Result<Config> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    parse_config(&text, path)
}
