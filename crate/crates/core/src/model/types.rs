use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{db_to_linear, dbm_to_watts, Real};

/// Hover and circuit power draw; everything that does not depend on the beamformers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerModel<T> {
    /// Hovering power `P_hov` (W).
    pub hover: T,
    /// Dynamic power of one active RF chain `P_dyn` (W).
    pub dynamic_per_chain: T,
    /// Static power of the cooling system `P_sta` (W).
    pub static_power: T,
}

impl<T: Real> PowerModel<T> {
    /// Circuit power `M * P_dyn + P_sta`.
    pub fn circuit(&self, num_antennas: usize) -> T {
        T::lit(num_antennas as f64) * self.dynamic_per_chain + self.static_power
    }

    /// `P_hov + P_cir`.
    pub fn fixed(&self, num_antennas: usize) -> T {
        self.hover + self.circuit(num_antennas)
    }
}

/// A sensing direction and the beampattern level desired there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarTarget<T> {
    /// Direction relative to the array broadside (rad).
    pub angle: T,
    /// Desired beampattern level `zeta` (linear power, unnormalized steering).
    pub level: T,
}

/// All scenario constants, in linear SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig<T> {
    pub num_antennas: usize,
    pub num_users: usize,
    /// Element spacing over wavelength, `D / lambda`.
    pub spacing_ratio: T,
    /// UAV altitude `H` (m).
    pub uav_height: T,
    pub pathloss_exponent: T,
    /// Receiver noise power `sigma^2` (W).
    pub noise_power: T,
    /// Transmit power budget `P_max` (W).
    pub power_budget: T,
    pub power: PowerModel<T>,
    /// Per-user QoS thresholds `R_k^th` (bits/s/Hz).
    pub qos_thresholds: Vec<T>,
    pub targets: Vec<RadarTarget<T>>,
    /// Beampattern mean-square-error tolerance `delta` (linear).
    pub beampattern_tolerance: T,
    /// Side of the square service area (m); users live in `[0, side]^2`.
    pub area_side: T,
    pub rng_seed: u64,
}

/// Default ratio between a target's desired level and `M * P_ref`.
pub const DEFAULT_RADAR_LEVEL_RATIO: f64 = 0.5;
/// Default reference power for the desired radar level (dBm).
pub const DEFAULT_RADAR_REFERENCE_DBM: f64 = 23.0;
/// Default per-user QoS threshold (bits/s/Hz).
pub const DEFAULT_QOS: f64 = 1.0;

/// Desired level `eta * M * P_ref` for a target.
pub fn default_radar_level<T: Real>(ratio: T, reference_power: T, num_antennas: usize) -> T {
    ratio * T::lit(num_antennas as f64) * reference_power
}

impl<T: Real> SystemConfig<T> {
    /// Default scenario: M = 8, K = 4, half-wavelength ULA, H = 50 m,
    /// pathloss exponent 2, noise -50 dBm, fixed power 30 dBm, budget 26 dBm,
    /// delta = -20 dB, 50 m x 50 m area and one target at broadside.
    pub fn default_scenario() -> Self {
        let num_antennas = 8;
        let num_users = 4;
        let level = default_radar_level(
            T::lit(DEFAULT_RADAR_LEVEL_RATIO),
            dbm_to_watts(T::lit(DEFAULT_RADAR_REFERENCE_DBM)),
            num_antennas,
        );
        Self {
            num_antennas,
            num_users,
            spacing_ratio: T::lit(0.5),
            uav_height: T::lit(50.0),
            pathloss_exponent: T::lit(2.0),
            noise_power: dbm_to_watts(T::lit(-50.0)),
            power_budget: dbm_to_watts(T::lit(26.0)),
            // 0.5 W hover + 8 x 50 mW chains + 0.1 W static = 30 dBm.
            power: PowerModel {
                hover: T::lit(0.5),
                dynamic_per_chain: T::lit(0.05),
                static_power: T::lit(0.1),
            },
            qos_thresholds: vec![T::lit(DEFAULT_QOS); num_users],
            targets: vec![RadarTarget {
                angle: T::zero(),
                level,
            }],
            beampattern_tolerance: db_to_linear(T::lit(-20.0)),
            area_side: T::lit(50.0),
            rng_seed: 0,
        }
    }

    /// `P_hov + P_cir` for this array size.
    pub fn fixed_power(&self) -> T {
        self.power.fixed(self.num_antennas)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        if self.num_antennas == 0 {
            return bad("num_antennas must be at least 1");
        }
        if self.num_users == 0 {
            return bad("num_users must be at least 1");
        }
        if self.qos_thresholds.len() != self.num_users {
            return bad("qos_thresholds must have one entry per user");
        }
        if !(self.spacing_ratio > T::zero()) {
            return bad("spacing_ratio must be positive");
        }
        if !(self.uav_height > T::zero()) {
            return bad("uav_height must be positive");
        }
        if !(self.pathloss_exponent > T::zero()) {
            return bad("pathloss_exponent must be positive");
        }
        if !(self.noise_power > T::zero()) || !(self.power_budget > T::zero()) {
            return bad("noise_power and power_budget must be positive");
        }
        let p = &self.power;
        if !(p.hover > T::zero()) || !(p.dynamic_per_chain > T::zero()) || !(p.static_power > T::zero())
        {
            return bad("hover, dynamic and static power must be positive");
        }
        if !(self.beampattern_tolerance > T::zero()) {
            return bad("beampattern_tolerance must be positive");
        }
        if !(self.area_side > T::zero()) {
            return bad("area_side must be positive");
        }
        if self.targets.iter().any(|t| !(t.level >= T::zero())) {
            return bad("radar target levels must be non-negative");
        }
        if self.qos_thresholds.iter().any(|r| !(*r >= T::zero())) {
            return bad("qos thresholds must be non-negative");
        }
        Ok(())
    }

    /// Whether `xy` lies inside the service square.
    pub fn contains(&self, xy: [T; 2]) -> bool {
        xy.iter().all(|&c| c >= T::zero() && c <= self.area_side)
    }
}

/// A single-antenna ground user.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserTerminal<T> {
    /// Ground position `z_k` (m).
    pub position: [T; 2],
    /// Small-scale path gain `alpha_k`.
    pub fading: Complex<T>,
    /// Angle of departure of the LoS path (rad).
    pub aod: T,
}

/// Transmit precoders stored column by column: column 0 is the common
/// precoder, column `k` the private precoder of user `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct Beamformer<T> {
    num_antennas: usize,
    columns: Vec<Vec<Complex<T>>>,
}

impl<T: Real> Beamformer<T> {
    pub fn zeros(num_antennas: usize, num_users: usize) -> Self {
        Self {
            num_antennas,
            columns: vec![vec![Complex::new(T::zero(), T::zero()); num_antennas]; num_users + 1],
        }
    }

    pub fn from_columns(columns: Vec<Vec<Complex<T>>>) -> Result<Self> {
        let num_antennas = columns.first().map(Vec::len).unwrap_or(0);
        if columns.len() < 2 || num_antennas == 0 {
            return Err(Error::DimensionMismatch(
                "beamformer needs a common column plus at least one private column".into(),
            ));
        }
        if columns.iter().any(|c| c.len() != num_antennas) {
            return Err(Error::DimensionMismatch("ragged beamformer columns".into()));
        }
        Ok(Self {
            num_antennas,
            columns,
        })
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    /// Number of private columns `K`.
    pub fn num_users(&self) -> usize {
        self.columns.len() - 1
    }

    pub fn column(&self, j: usize) -> &[Complex<T>] {
        &self.columns[j]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [Complex<T>] {
        &mut self.columns[j]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[Complex<T>]> {
        self.columns.iter().map(Vec::as_slice)
    }

    /// `tr(x x^H)`, the total transmit power.
    pub fn power(&self) -> T {
        self.columns
            .iter()
            .flatten()
            .fold(T::zero(), |acc, v| acc + v.norm_sqr())
    }

    pub fn scaled(&self, factor: T) -> Self {
        let mut out = self.clone();
        out.columns.iter_mut().flatten().for_each(|v| *v *= factor);
        out
    }

    /// `self + t * (other - self)`.
    pub fn lerp(&self, other: &Self, t: T) -> Self {
        let mut out = self.clone();
        for (a, b) in out.columns.iter_mut().flatten().zip(other.columns.iter().flatten()) {
            *a = *a + (*b - *a) * t;
        }
        out
    }

    pub fn check_shape(&self, num_antennas: usize, num_users: usize) -> Result<()> {
        if self.num_antennas != num_antennas || self.num_users() != num_users {
            return Err(Error::DimensionMismatch(format!(
                "beamformer is {}x{}, expected {}x{}",
                self.num_antennas,
                self.columns.len(),
                num_antennas,
                num_users + 1
            )));
        }
        Ok(())
    }
}

/// A candidate solution of the joint problem.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatingPoint<T> {
    /// UAV ground projection `z` (m).
    pub uav_xy: [T; 2],
    pub beamformers: Beamformer<T>,
    /// Common-rate split `beta` (bits/s/Hz).
    pub common_rates: Vec<T>,
}

impl<T: Real> OperatingPoint<T> {
    pub fn check_shape(&self, cfg: &SystemConfig<T>) -> Result<()> {
        self.beamformers.check_shape(cfg.num_antennas, cfg.num_users)?;
        if self.common_rates.len() != cfg.num_users {
            return Err(Error::DimensionMismatch(format!(
                "{} common rates for {} users",
                self.common_rates.len(),
                cfg.num_users
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_scenario_values() {
        let cfg = SystemConfig::<f64>::default_scenario();
        cfg.validate().unwrap();
        assert!((cfg.fixed_power() - 1.0).abs() < 1e-12);
        assert!((cfg.noise_power - 1e-8).abs() < 1e-20);
        assert!((cfg.power_budget - 0.398_107_170_553_497).abs() < 1e-12);
        assert!((cfg.beampattern_tolerance - 0.01).abs() < 1e-15);
        assert_eq!(cfg.targets.len(), 1);
    }

    #[test]
    fn invariants_rejected() {
        let mut cfg = SystemConfig::<f64>::default_scenario();
        cfg.num_antennas = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = SystemConfig::<f64>::default_scenario();
        cfg.beampattern_tolerance = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = SystemConfig::<f64>::default_scenario();
        cfg.targets[0].level = -1.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn beamformer_shape_and_power() {
        let mut x = Beamformer::<f64>::zeros(3, 2);
        x.column_mut(1)[0] = Complex::new(1.0, 1.0);
        x.column_mut(2)[2] = Complex::new(0.0, 2.0);
        assert_eq!(x.num_users(), 2);
        assert!((x.power() - 6.0).abs() < 1e-15);
        assert!((x.scaled(0.5).power() - 1.5).abs() < 1e-15);
        assert!(x.check_shape(3, 2).is_ok());
        assert!(x.check_shape(4, 2).is_err());
        assert!(Beamformer::<f64>::from_columns(vec![vec![Complex::new(0.0, 0.0)]]).is_err());
    }
}
