//! Brute-force references for the optimization paths.
//!
//! Everything here is evaluated from the raw definitions (steering vector,
//! path loss, SINR, beampattern, power model) without calling into
//! [`crate::model`], [`crate::linearize`] or the solver, so a shared bug
//! cannot hide on both sides of a comparison. Only the RSMA scheme is covered.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::error::{Error, Result};
use crate::linearize::AffineSurrogate;
use crate::{Beams, Config, Cplx, User};

/// Residual accepted when checking the true constraints.
pub const ORACLE_TOLERANCE: f64 = 1e-7;

fn steering(theta: f64, m: usize, rho: f64) -> Vec<Cplx> {
    (0..m)
        .map(|i| Cplx::from_polar(1.0, 2.0 * std::f64::consts::PI * rho * i as f64 * theta.sin()))
        .collect()
}

fn dot(h: &[Cplx], x: &[Cplx]) -> Cplx {
    h.iter().zip(x).map(|(a, b)| a.conj() * b).sum()
}

/// Channels at UAV position `z`, recomputed from scratch.
pub fn raw_channels(cfg: &Config, users: &[User], z: [f64; 2]) -> Vec<Vec<Cplx>> {
    let m = cfg.num_antennas;
    users
        .iter()
        .map(|u| {
            let d2 = cfg.uav_height.powi(2) + (z[0] - u.position[0]).powi(2) + (z[1] - u.position[1]).powi(2);
            let pl = 1.0 + d2.sqrt().powf(cfg.pathloss_exponent);
            // sqrt(M) times the unit-norm steering vector is the unnormalized one.
            let amp = u.fading / pl.sqrt();
            steering(u.aod, m, cfg.spacing_ratio).into_iter().map(|a| a * amp).collect()
        })
        .collect()
}

/// True RSMA figures at one point; columns are `[x_c, x_1, ..., x_K]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RawEvaluation {
    pub private_rates: Vec<f64>,
    pub common_rates: Vec<f64>,
    pub mse: f64,
    pub power: f64,
    pub energy_efficiency: f64,
    pub max_residual: f64,
}

pub fn raw_evaluate(cfg: &Config, channels: &[Vec<Cplx>], cols: &[Vec<Cplx>], beta: &[f64]) -> RawEvaluation {
    let k = channels.len();
    let noise = cfg.noise_power;
    let mut private_rates = Vec::with_capacity(k);
    let mut common_rates = Vec::with_capacity(k);
    for h in channels {
        let p: Vec<f64> = cols.iter().map(|x| dot(h, x).norm_sqr()).collect();
        let private_total: f64 = p[1..].iter().sum();
        common_rates.push((1.0 + p[0] / (private_total + noise)).log2());
        let own = private_rates.len() + 1;
        private_rates.push((1.0 + p[own] / (private_total - p[own] + noise)).log2());
    }
    let mse: f64 = cfg
        .targets
        .iter()
        .map(|t| {
            let a = steering(t.angle, cfg.num_antennas, cfg.spacing_ratio);
            let level: f64 = cols.iter().map(|x| dot(&a, x).norm_sqr()).sum();
            (level - t.level).powi(2)
        })
        .sum();
    let power: f64 = cols.iter().flatten().map(|v| v.norm_sqr()).sum();
    let fixed = cfg.power.hover + cfg.num_antennas as f64 * cfg.power.dynamic_per_chain + cfg.power.static_power;
    let throughput: f64 = beta.iter().sum::<f64>() + private_rates.iter().sum::<f64>();
    let min_common = common_rates.iter().copied().fold(f64::INFINITY, f64::min);
    let mut max_residual = (beta.iter().sum::<f64>() - min_common)
        .max(power - cfg.power_budget)
        .max(mse - cfg.beampattern_tolerance);
    for (i, b) in beta.iter().enumerate() {
        max_residual = max_residual.max(-b).max(cfg.qos_thresholds[i] - b - private_rates[i]);
    }
    RawEvaluation { private_rates, common_rates, mse, power, energy_efficiency: throughput / (power + fixed), max_residual }
}

fn columns(x: &Beams) -> Vec<Vec<Cplx>> {
    x.columns().map(|c| c.to_vec()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridResult {
    pub position: [f64; 2],
    /// `sum_k log2(1 + r_k)` at `position`.
    pub objective: f64,
    pub feasible_points: usize,
    pub lattice_points: usize,
    /// Largest objective change between lattice neighbours divided by the
    /// step, times half the cell diagonal: how far an off-lattice optimum can
    /// exceed `objective` if that slope holds.
    pub lipschitz_gap: f64,
}

/// Exhaustive search of the UAV position over the `step`-spaced lattice of
/// the service area with `x` and `beta` fixed. `None` if no lattice point
/// satisfies the true constraints.
pub fn grid_search_location(cfg: &Config, users: &[User], x: &Beams, beta: &[f64], step: f64) -> Result<Option<GridResult>> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("grid step must be positive, got {step}")));
    }
    let cols = columns(x);
    let n = (cfg.area_side / step + 1e-9).floor() as usize + 1;
    let mut values = vec![f64::NAN; n * n];
    let mut best: Option<(usize, f64)> = None;
    let mut feasible_points = 0;
    for i in 0..n {
        for j in 0..n {
            let z = [i as f64 * step, j as f64 * step];
            let e = raw_evaluate(cfg, &raw_channels(cfg, users, z), &cols, beta);
            let objective: f64 = e.private_rates.iter().sum();
            values[i * n + j] = objective;
            if e.max_residual <= ORACLE_TOLERANCE {
                feasible_points += 1;
                if best.is_none_or(|(_, b)| objective > b) {
                    best = Some((i * n + j, objective));
                }
            }
        }
    }
    let mut slope: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let v = values[i * n + j];
            if i + 1 < n {
                slope = slope.max((values[(i + 1) * n + j] - v).abs() / step);
            }
            if j + 1 < n {
                slope = slope.max((values[i * n + j + 1] - v).abs() / step);
            }
        }
    }
    Ok(best.map(|(idx, objective)| GridResult {
        position: [(idx / n) as f64 * step, (idx % n) as f64 * step],
        objective,
        feasible_points,
        lattice_points: n * n,
        lipschitz_gap: slope * step * std::f64::consts::FRAC_1_SQRT_2,
    }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampleResult {
    pub energy_efficiency: f64,
    pub beamformers: Beams,
    pub common_rates: Vec<f64>,
    pub feasible_samples: usize,
}

/// Draws `n` random precoders (Gaussian columns rescaled to a uniform power
/// in `[0, P_max]`) with the split uniform on `{beta >= 0, sum beta = R_c}`,
/// and keeps the best feasible energy efficiency. `None` if no draw is
/// feasible.
pub fn random_feasible_sampler(cfg: &Config, channels: &[Vec<Cplx>], n: usize, seed: u64) -> Result<Option<SampleResult>> {
    if n == 0 {
        return Err(Error::InvalidArgument("sampler needs at least one draw".into()));
    }
    let (m, k) = (cfg.num_antennas, channels.len());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<SampleResult> = None;
    let mut feasible_samples = 0;
    for _ in 0..n {
        let mut cols: Vec<Vec<Cplx>> = (0..=k)
            .map(|_| (0..m).map(|_| Cplx::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect())
            .collect();
        let target = rng.gen_range(0.0..=cfg.power_budget);
        let norm: f64 = cols.iter().flatten().map(|v| v.norm_sqr()).sum();
        let scale = if norm > 0.0 { (target / norm).sqrt() } else { 0.0 };
        cols.iter_mut().flatten().for_each(|v| *v *= scale);
        let rc = raw_evaluate(cfg, channels, &cols, &vec![0.0; k]).common_rates.iter().copied().fold(f64::INFINITY, f64::min);
        let w: Vec<f64> = (0..k).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = w.iter().sum();
        let beta: Vec<f64> = w.iter().map(|v| rc * v / total).collect();
        let e = raw_evaluate(cfg, channels, &cols, &beta);
        if e.max_residual > ORACLE_TOLERANCE {
            continue;
        }
        feasible_samples += 1;
        if best.as_ref().is_none_or(|b| e.energy_efficiency > b.energy_efficiency) {
            best = Some(SampleResult {
                energy_efficiency: e.energy_efficiency,
                beamformers: Beams::from_columns(cols)?,
                common_rates: beta,
                feasible_samples: 0,
            });
        }
    }
    Ok(best.map(|b| SampleResult { feasible_samples, ..b }))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDifferenceReport {
    /// `|f(ref) - surrogate(ref)|`.
    pub value_gap: f64,
    /// Largest component gap between the central-difference and surrogate
    /// gradients, relative to the largest central-difference component.
    pub max_grad_relerr: f64,
    pub passes: bool,
}

pub const VALUE_GAP_LIMIT: f64 = 1e-10;
pub const GRADIENT_RELERR_LIMIT: f64 = 1e-4;

/// Compares `surrogate` with central differences of `f` at `point`.
pub fn finite_difference_check(
    f: impl Fn(&[f64]) -> f64,
    surrogate: &AffineSurrogate<f64>,
    point: &[f64],
    step: f64,
) -> Result<FiniteDifferenceReport> {
    if !(step > 0.0) {
        return Err(Error::InvalidArgument(format!("difference step must be positive, got {step}")));
    }
    if surrogate.gradient.len() != point.len() {
        return Err(Error::DimensionMismatch(format!(
            "surrogate over {} variables checked at {}",
            surrogate.gradient.len(),
            point.len()
        )));
    }
    let value_gap = (f(point) - surrogate.evaluate(point)?).abs();
    let mut v = point.to_vec();
    let numeric: Vec<f64> = (0..point.len())
        .map(|i| {
            v[i] = point[i] + step;
            let up = f(&v);
            v[i] = point[i] - step;
            let down = f(&v);
            v[i] = point[i];
            (up - down) / (2.0 * step)
        })
        .collect();
    let scale = numeric.iter().fold(0.0_f64, |a, g| a.max(g.abs()));
    let worst = numeric.iter().zip(&surrogate.gradient).fold(0.0_f64, |a, (n, s)| a.max((n - s).abs()));
    let max_grad_relerr = if scale > 0.0 { worst / scale } else { worst };
    Ok(FiniteDifferenceReport {
        value_gap,
        max_grad_relerr,
        passes: value_gap <= VALUE_GAP_LIMIT && max_grad_relerr <= GRADIENT_RELERR_LIMIT,
    })
}
