//! Multiple-access schemes expressed as sets of decoding links.
//!
//! A link is "user `k` decodes stream `desired` while streams `interferers`
//! are still present". Each link feeds one rate variable; the SINR of a
//! variable is the minimum over its links. RSMA, gain-ordered SIC NOMA and
//! equal-slot OMA all fit this shape, so the subproblems are written once.
//!
//! For OMA the stored beamformer holds `x_k / sqrt(K)`: its Gram matrix is
//! the slot-averaged covariance and its trace the average transmit power.
//! Inside slot `k` the true precoder is `sqrt(K)` times the stored column,
//! hence the link gain `K`, and each rate carries the `1/K` time share.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{beampattern_mse, inner, FeasibilityReport};
use crate::{Beams, Channels, Config, Point};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    Rsma,
    Noma,
    Oma,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Rsma, Scheme::Noma, Scheme::Oma];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Rsma => "rsma",
            Scheme::Noma => "noma",
            Scheme::Oma => "oma",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rsma" => Ok(Scheme::Rsma),
            "noma" => Ok(Scheme::Noma),
            "oma" => Ok(Scheme::Oma),
            other => Err(Error::InvalidArgument(format!("unknown scheme `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateRole {
    /// Carries user `user`'s private message.
    Private,
    /// Common-stream decodability at `user`.
    Common,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateVar {
    pub role: RateRole,
    pub user: usize,
    /// Time share multiplying `log2(1 + SINR)`.
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    /// Receiving user (whose channel is used).
    pub user: usize,
    /// Beamformer column being decoded.
    pub desired: usize,
    /// Columns still interfering.
    pub interferers: Vec<usize>,
    /// Rate variable this link limits.
    pub var: usize,
    /// Multiplier on every received power of this link.
    pub gain: f64,
    /// The desired column may be phase-rotated for this receiver, so
    /// `Re(h^H x_d)` can stand in for `|h^H x_d|`.
    pub aligned: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkSet {
    pub scheme: Scheme,
    pub num_users: usize,
    pub vars: Vec<RateVar>,
    pub links: Vec<Link>,
    /// Rate variable holding each user's private rate.
    pub private_var: Vec<usize>,
    /// SIC order (strongest first); identity for RSMA and OMA.
    pub decode_order: Vec<usize>,
}

/// Users sorted by descending channel gain, lower index first on ties.
pub fn sic_order(gains: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..gains.len()).collect();
    order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]).then(a.cmp(&b)));
    order
}

impl LinkSet {
    /// `gains[k] = ||h_k||^2` fixes the NOMA decoding order; ignored otherwise.
    pub fn new(scheme: Scheme, gains: &[f64]) -> Result<Self> {
        let k = gains.len();
        if k == 0 {
            return Err(Error::InvalidArgument("at least one user is required".into()));
        }
        let all_private: Vec<usize> = (1..=k).collect();
        let private = |user, weight| RateVar { role: RateRole::Private, user, weight };
        let mut vars: Vec<RateVar> = (0..k).map(|u| private(u, 1.0)).collect();
        let mut links = Vec::new();
        let mut decode_order: Vec<usize> = (0..k).collect();
        match scheme {
            Scheme::Rsma => {
                for u in 0..k {
                    links.push(Link {
                        user: u,
                        desired: u + 1,
                        interferers: all_private.iter().copied().filter(|&j| j != u + 1).collect(),
                        var: u,
                        gain: 1.0,
                        aligned: true,
                    });
                }
                for u in 0..k {
                    vars.push(RateVar { role: RateRole::Common, user: u, weight: 1.0 });
                    links.push(Link {
                        user: u,
                        desired: 0,
                        interferers: all_private.clone(),
                        var: k + u,
                        gain: 1.0,
                        aligned: false,
                    });
                }
            }
            Scheme::Noma => {
                decode_order = sic_order(gains);
                let mut rank = vec![0; k];
                for (r, &u) in decode_order.iter().enumerate() {
                    rank[u] = r;
                }
                let stronger = |r: usize| decode_order[..r].iter().map(|&u| u + 1).collect::<Vec<_>>();
                for (u, &r) in rank.iter().enumerate() {
                    links.push(Link {
                        user: u,
                        desired: u + 1,
                        interferers: stronger(r),
                        var: u,
                        gain: 1.0,
                        aligned: true,
                    });
                }
                // Stronger users decode and cancel every weaker stream first.
                for u in 0..k {
                    for &w in &decode_order[rank[u] + 1..] {
                        links.push(Link {
                            user: u,
                            desired: w + 1,
                            interferers: stronger(rank[w]),
                            var: w,
                            gain: 1.0,
                            aligned: false,
                        });
                    }
                }
            }
            Scheme::Oma => {
                let share = 1.0 / k as f64;
                vars = (0..k).map(|u| private(u, share)).collect();
                for u in 0..k {
                    links.push(Link {
                        user: u,
                        desired: u + 1,
                        interferers: Vec::new(),
                        var: u,
                        gain: k as f64,
                        aligned: true,
                    });
                }
            }
        }
        Ok(Self { scheme, num_users: k, vars, links, private_var: (0..k).collect(), decode_order })
    }

    pub fn uses_common(&self) -> bool {
        self.scheme == Scheme::Rsma
    }

    pub fn common_vars(&self) -> impl Iterator<Item = usize> + '_ {
        self.vars.iter().enumerate().filter(|(_, v)| v.role == RateRole::Common).map(|(i, _)| i)
    }

    pub fn links_of(&self, var: usize) -> impl Iterator<Item = &Link> + '_ {
        self.links.iter().filter(move |l| l.var == var)
    }

    /// `(signal, interference + noise)` of a link, both in watts.
    pub fn link_powers(&self, link: &Link, channels: &Channels, y: &Beams, noise: f64) -> (f64, f64) {
        let h = &channels.channels[link.user];
        let signal = link.gain * inner(h, y.column(link.desired)).norm_sqr();
        let interference = link
            .interferers
            .iter()
            .map(|&j| link.gain * inner(h, y.column(j)).norm_sqr())
            .sum::<f64>();
        (signal, interference + noise)
    }

    /// SINR of every rate variable (minimum over its links).
    pub fn var_sinr(&self, channels: &Channels, y: &Beams, noise: f64) -> Vec<f64> {
        let mut sinr = vec![f64::INFINITY; self.vars.len()];
        for l in &self.links {
            let (s, i) = self.link_powers(l, channels, y, noise);
            sinr[l.var] = sinr[l.var].min(s / i);
        }
        sinr
    }
}

/// True figures of merit of an operating point under one scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeMetrics {
    pub var_sinr: Vec<f64>,
    /// Time-share-weighted private rate per user.
    pub private_rate: Vec<f64>,
    /// Common rate `min_k R_k^c`; zero when the scheme has no common stream.
    pub common_rate: f64,
    pub beampattern_mse: f64,
    pub transmit_power: f64,
    /// `sum_k beta_k + R_k`.
    pub sum_rate: f64,
    pub energy_efficiency: f64,
}

pub fn evaluate(links: &LinkSet, cfg: &Config, channels: &Channels, point: &Point) -> Result<SchemeMetrics> {
    point.check_shape(cfg)?;
    if channels.len() != links.num_users {
        return Err(Error::DimensionMismatch("channel count differs from link set".into()));
    }
    let y = &point.beamformers;
    let var_sinr = links.var_sinr(channels, y, cfg.noise_power);
    let rate = |v: usize| links.vars[v].weight * var_sinr[v].ln_1p() / std::f64::consts::LN_2;
    let private_rate: Vec<f64> = links.private_var.iter().map(|&v| rate(v)).collect();
    let common_rate = links.common_vars().map(rate).fold(f64::INFINITY, f64::min);
    let common_rate = if common_rate.is_finite() { common_rate } else { 0.0 };
    let sum_rate = point.common_rates.iter().sum::<f64>() + private_rate.iter().sum::<f64>();
    let transmit_power = y.power();
    Ok(SchemeMetrics {
        beampattern_mse: beampattern_mse(y, &cfg.targets, cfg.spacing_ratio)?,
        energy_efficiency: sum_rate / (transmit_power + cfg.fixed_power()),
        var_sinr,
        private_rate,
        common_rate,
        transmit_power,
        sum_rate,
    })
}

/// Constraint residuals of `point` for its scheme (`<= 0` when satisfied).
/// Schemes without a common stream must carry a zero split.
pub fn feasibility(links: &LinkSet, cfg: &Config, metrics: &SchemeMetrics, point: &Point) -> FeasibilityReport<f64> {
    let split: f64 = point.common_rates.iter().sum();
    let common_rate = if links.uses_common() {
        split - metrics.common_rate
    } else {
        point.common_rates.iter().fold(0.0f64, |m, b| m.max(b.abs()))
    };
    FeasibilityReport {
        common_rate,
        nonnegative_split: point.common_rates.iter().fold(f64::NEG_INFINITY, |m, b| m.max(-b)),
        power: metrics.transmit_power - cfg.power_budget,
        beampattern: metrics.beampattern_mse - cfg.beampattern_tolerance,
        qos: cfg
            .qos_thresholds
            .iter()
            .zip(&point.common_rates)
            .zip(&metrics.private_rate)
            .map(|((th, b), r)| th - (b + r))
            .collect(),
    }
}

/// Slot-`k` precoder of an OMA point (undoes the stored `1/sqrt(K)` scaling).
pub fn oma_slot_precoder(y: &Beams, k: usize) -> Vec<crate::Cplx> {
    let s = (y.num_users() as f64).sqrt();
    y.column(k + 1).iter().map(|v| v * s).collect()
}
