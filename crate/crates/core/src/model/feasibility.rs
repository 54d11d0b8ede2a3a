use super::physics::{achievable_rates, beampattern_mse, ChannelSet};
use super::types::{OperatingPoint, SystemConfig, UserTerminal};
use crate::error::Result;
use crate::scalar::Real;

/// Signed residuals of the joint problem's constraints; a residual `<= 0`
/// means the constraint holds.
#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport<T> {
    /// `sum beta - min_k R_k^c`.
    pub common_rate: T,
    /// `max_k (-beta_k)`.
    pub nonnegative_split: T,
    /// `tr(x x^H) - P_max`.
    pub power: T,
    /// `MSE - delta`.
    pub beampattern: T,
    /// `R_k^th - (beta_k + R_k)` per user.
    pub qos: Vec<T>,
}

impl<T: Real> FeasibilityReport<T> {
    pub fn max_residual(&self) -> T {
        self.qos
            .iter()
            .copied()
            .fold(
                self.common_rate
                    .max(self.nonnegative_split)
                    .max(self.power)
                    .max(self.beampattern),
                T::max,
            )
    }

    pub fn is_feasible(&self, tolerance: T) -> bool {
        self.max_residual() <= tolerance
    }

    /// Every residual except the QoS group, for points that only need to be
    /// physically admissible.
    pub fn qos_satisfied(&self, tolerance: T) -> bool {
        self.qos.iter().all(|r| *r <= tolerance)
    }
}

/// Evaluates the joint problem's constraints at `point`.
pub fn check_feasibility<T: Real>(
    point: &OperatingPoint<T>,
    cfg: &SystemConfig<T>,
    users: &[UserTerminal<T>],
) -> Result<FeasibilityReport<T>> {
    point.check_shape(cfg)?;
    let channels = ChannelSet::new(cfg, point.uav_xy, users)?;
    let rates = achievable_rates(&channels, &point.beamformers, cfg.noise_power)?;
    let split: T = point.common_rates.iter().fold(T::zero(), |a, &b| a + b);
    let nonnegative_split = point
        .common_rates
        .iter()
        .fold(T::neg_infinity(), |a, &b| a.max(-b));
    let mse = beampattern_mse(&point.beamformers, &cfg.targets, cfg.spacing_ratio)?;
    let qos = cfg
        .qos_thresholds
        .iter()
        .zip(&point.common_rates)
        .zip(&rates.private)
        .map(|((&th, &b), &r)| th - (b + r))
        .collect();
    Ok(FeasibilityReport {
        common_rate: split - rates.min_common,
        nonnegative_split,
        power: point.beamformers.power() - cfg.power_budget,
        beampattern: mse - cfg.beampattern_tolerance,
        qos,
    })
}
