use num_complex::Complex;

use super::types::{Beamformer, OperatingPoint, PowerModel, RadarTarget, SystemConfig, UserTerminal};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// `h^H x` for equally sized vectors.
pub fn inner<T: Real>(h: &[Complex<T>], x: &[Complex<T>]) -> Complex<T> {
    h.iter()
        .zip(x)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b)
}

/// ULA steering vector; entry `m` is `c * exp(j 2 pi rho m sin(theta))` with
/// `c = 1/sqrt(M)` when `normalized`, else 1.
pub fn steering_vector<T: Real>(
    theta: T,
    num_antennas: usize,
    spacing_ratio: T,
    normalized: bool,
) -> Result<Vec<Complex<T>>> {
    if num_antennas == 0 {
        return Err(Error::InvalidArgument("steering vector needs M >= 1".into()));
    }
    let scale = if normalized {
        T::one() / T::lit(num_antennas as f64).sqrt()
    } else {
        T::one()
    };
    let step = T::TAU() * spacing_ratio * theta.sin();
    Ok((0..num_antennas)
        .map(|m| Complex::from_polar(scale, step * T::lit(m as f64)))
        .collect())
}

/// Path loss `1 + X^gamma`.
pub fn path_loss<T: Real>(distance: T, exponent: T) -> Result<T> {
    if !(distance >= T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "path loss distance must be non-negative, got {distance}"
        )));
    }
    Ok(T::one() + distance.powf(exponent))
}

/// 3-D distance between the UAV at `uav_xy` and a ground position.
pub fn link_distance<T: Real>(height: T, uav_xy: [T; 2], ground: [T; 2]) -> T {
    let dx = uav_xy[0] - ground[0];
    let dy = uav_xy[1] - ground[1];
    (height * height + dx * dx + dy * dy).sqrt()
}

/// Angle of departure toward a ground position for a ULA laid along the x axis.
pub fn aod_from_geometry<T: Real>(height: T, uav_xy: [T; 2], ground: [T; 2]) -> T {
    let d = link_distance(height, uav_xy, ground);
    ((ground[0] - uav_xy[0]) / d).asin()
}

/// `h_k = sqrt(M) alpha_k a(theta_k) / sqrt(PL(d_k))` with the normalized steering vector.
pub fn channel_vector<T: Real>(
    cfg: &SystemConfig<T>,
    uav_xy: [T; 2],
    user: &UserTerminal<T>,
) -> Result<Vec<Complex<T>>> {
    let d = link_distance(cfg.uav_height, uav_xy, user.position);
    let pl = path_loss(d, cfg.pathloss_exponent)?;
    let a = steering_vector(user.aod, cfg.num_antennas, cfg.spacing_ratio, true)?;
    let gain = user.fading * (T::lit(cfg.num_antennas as f64) / pl).sqrt();
    Ok(a.into_iter().map(|v| v * gain).collect())
}

/// Channels of every user for one UAV position.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet<T> {
    pub channels: Vec<Vec<Complex<T>>>,
    pub distances: Vec<T>,
}

impl<T: Real> ChannelSet<T> {
    pub fn new(cfg: &SystemConfig<T>, uav_xy: [T; 2], users: &[UserTerminal<T>]) -> Result<Self> {
        let channels = users
            .iter()
            .map(|u| channel_vector(cfg, uav_xy, u))
            .collect::<Result<Vec<_>>>()?;
        let distances = users
            .iter()
            .map(|u| link_distance(cfg.uav_height, uav_xy, u.position))
            .collect();
        Ok(Self {
            channels,
            distances,
        })
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn gain(&self, k: usize) -> T {
        self.channels[k].iter().fold(T::zero(), |a, v| a + v.norm_sqr())
    }
}

/// SINR of the common stream at a user: private streams all count as interference.
pub fn common_sinr<T: Real>(h: &[Complex<T>], x: &Beamformer<T>, noise: T) -> T {
    let signal = inner(h, x.column(0)).norm_sqr();
    let interference = (1..=x.num_users()).fold(T::zero(), |acc, j| acc + inner(h, x.column(j)).norm_sqr());
    signal / (interference + noise)
}

/// SINR of private stream `k` (1-based column index) after the common stream is cancelled.
pub fn private_sinr<T: Real>(h: &[Complex<T>], x: &Beamformer<T>, k: usize, noise: T) -> Result<T> {
    let num_users = x.num_users();
    if k == 0 || k > num_users {
        return Err(Error::IndexOutOfRange {
            index: k,
            max: num_users,
        });
    }
    let signal = inner(h, x.column(k)).norm_sqr();
    let interference = (1..=num_users)
        .filter(|&j| j != k)
        .fold(T::zero(), |acc, j| acc + inner(h, x.column(j)).norm_sqr());
    Ok(signal / (interference + noise))
}

/// Per-user achievable rates of the RSMA scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct Rates<T> {
    pub common_sinr: Vec<T>,
    pub private_sinr: Vec<T>,
    /// `R_k^c = log2(1 + r_k^c)`.
    pub common: Vec<T>,
    /// `R_k = log2(1 + r_k)`.
    pub private: Vec<T>,
    /// `R_c = min_k R_k^c`.
    pub min_common: T,
    /// User attaining `min_common` (lowest index on ties).
    pub bottleneck: usize,
}

pub fn achievable_rates<T: Real>(channels: &ChannelSet<T>, x: &Beamformer<T>, noise: T) -> Result<Rates<T>> {
    if channels.len() != x.num_users() {
        return Err(Error::DimensionMismatch(format!(
            "{} channels for {} private columns",
            channels.len(),
            x.num_users()
        )));
    }
    let common_sinr: Vec<T> = channels.channels.iter().map(|h| common_sinr(h, x, noise)).collect();
    let private_sinr = channels
        .channels
        .iter()
        .enumerate()
        .map(|(i, h)| private_sinr(h, x, i + 1, noise))
        .collect::<Result<Vec<T>>>()?;
    let common: Vec<T> = common_sinr.iter().map(|r| r.ln_1p() / T::LN_2()).collect();
    let private = private_sinr.iter().map(|r| r.ln_1p() / T::LN_2()).collect();
    let (bottleneck, min_common) = common
        .iter()
        .copied()
        .enumerate()
        .fold((0, T::infinity()), |best, (k, r)| if r < best.1 { (k, r) } else { best });
    Ok(Rates {
        common_sinr,
        private_sinr,
        common,
        private,
        min_common,
        bottleneck,
    })
}

/// Beampattern level `a^H(theta) x x^H a(theta) = sum_j |a^H x_j|^2`.
pub fn beampattern_level<T: Real>(a: &[Complex<T>], x: &Beamformer<T>) -> T {
    x.columns().fold(T::zero(), |acc, col| acc + inner(a, col).norm_sqr())
}

/// `sum_l |a^H(theta_l) x x^H a(theta_l) - zeta_l|^2` with unnormalized steering vectors.
pub fn beampattern_mse<T: Real>(x: &Beamformer<T>, targets: &[RadarTarget<T>], spacing_ratio: T) -> Result<T> {
    if targets.is_empty() {
        return Err(Error::InvalidArgument("beampattern needs at least one target".into()));
    }
    let mut total = T::zero();
    for t in targets {
        let a = steering_vector(t.angle, x.num_antennas(), spacing_ratio, false)?;
        let err = beampattern_level(&a, x) - t.level;
        total += err * err;
    }
    Ok(total)
}

/// `(sum_k beta_k + R_k) / (tr(x x^H) + P_hov + P_cir)`.
pub fn energy_efficiency<T: Real>(
    common_rates: &[T],
    private_rates: &[T],
    x: &Beamformer<T>,
    power: &PowerModel<T>,
) -> Result<T> {
    if common_rates.iter().any(|b| *b < T::zero()) {
        return Err(Error::InvalidArgument("common rates must be non-negative".into()));
    }
    let numerator = common_rates.iter().chain(private_rates).fold(T::zero(), |a, &r| a + r);
    Ok(numerator / (x.power() + power.fixed(x.num_antennas())))
}

/// Every closed-form figure of merit of an operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics<T> {
    pub common_sinr: Vec<T>,
    pub private_sinr: Vec<T>,
    pub common_rate: Vec<T>,
    pub private_rate: Vec<T>,
    pub min_common_rate: T,
    pub beampattern_mse: T,
    pub transmit_power: T,
    pub energy_efficiency: T,
}

pub fn metrics<T: Real>(
    cfg: &SystemConfig<T>,
    users: &[UserTerminal<T>],
    point: &OperatingPoint<T>,
) -> Result<Metrics<T>> {
    point.check_shape(cfg)?;
    let channels = ChannelSet::new(cfg, point.uav_xy, users)?;
    let rates = achievable_rates(&channels, &point.beamformers, cfg.noise_power)?;
    let mse = beampattern_mse(&point.beamformers, &cfg.targets, cfg.spacing_ratio)?;
    let ee = energy_efficiency(&point.common_rates, &rates.private, &point.beamformers, &cfg.power)?;
    Ok(Metrics {
        common_sinr: rates.common_sinr,
        private_sinr: rates.private_sinr,
        common_rate: rates.common,
        private_rate: rates.private,
        min_common_rate: rates.min_common,
        beampattern_mse: mse,
        transmit_power: point.beamformers.power(),
        energy_efficiency: ee,
    })
}
