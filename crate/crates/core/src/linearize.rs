//! Convex surrogates for the SCA and DC machinery.
//!
//! Each surrogate is tangent to the function it replaces at a reference point.
//! The bound direction is recorded so callers know whether the surrogate can
//! be trusted away from the reference (`Lower`/`Upper`) or only near it
//! (`Local`).

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::{
    beampattern_mse, inner, steering_vector, Beamformer, ChannelSet, RadarTarget, SystemConfig,
    UserTerminal,
};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundDirection {
    /// Globally below the true function.
    Lower,
    /// Globally above the true function.
    Upper,
    /// Tangent only; no global ordering.
    Local,
}

/// `value_at_ref + gradient . (v - reference_point)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineSurrogate<T> {
    pub reference_point: Vec<T>,
    pub gradient: Vec<T>,
    pub value_at_ref: T,
    pub bound_direction: BoundDirection,
}

impl<T: Real> AffineSurrogate<T> {
    pub fn evaluate(&self, v: &[T]) -> Result<T> {
        if v.len() != self.gradient.len() {
            return Err(Error::DimensionMismatch(format!(
                "surrogate over {} variables evaluated at {}",
                self.gradient.len(),
                v.len()
            )));
        }
        Ok(self
            .gradient
            .iter()
            .zip(v.iter().zip(&self.reference_point))
            .fold(self.value_at_ref, |acc, (g, (x, r))| acc + *g * (*x - *r)))
    }
}

/// Real vectorization of a beamformer: entry `2 (j M + m)` is `Re x_j[m]`,
/// the next one `Im x_j[m]`.
pub fn vectorize<T: Real>(x: &Beamformer<T>) -> Vec<T> {
    x.columns().flatten().flat_map(|v| [v.re, v.im]).collect()
}

pub fn devectorize<T: Real>(v: &[T], num_antennas: usize, num_users: usize) -> Result<Beamformer<T>> {
    if v.len() != 2 * num_antennas * (num_users + 1) {
        return Err(Error::DimensionMismatch(format!(
            "vector of length {} for a {}x{} beamformer",
            v.len(),
            num_antennas,
            num_users + 1
        )));
    }
    let cols = v
        .chunks(2 * num_antennas)
        .map(|c| c.chunks(2).map(|p| Complex::new(p[0], p[1])).collect())
        .collect();
    Beamformer::from_columns(cols)
}

/// Gradient of `|a^H x|^2` with respect to `(Re x_m, Im x_m)` pairs, given `w = a^H x`.
fn gain_gradient<T: Real>(a: &[Complex<T>], w: Complex<T>) -> impl Iterator<Item = [T; 2]> + '_ {
    let two = T::lit(2.0);
    a.iter().map(move |am| {
        let p = w * am;
        [two * p.re, two * p.im]
    })
}

/// Which surrogate of the received power to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerBound {
    /// First-order expansion in `z`; local only.
    Lower,
    /// `C / PL(u_lin(z))` where `u_lin` is the tangent of `|z - z_k|^2`;
    /// convex and globally above the received power.
    Upper,
    /// Tangent of the path-loss reciprocal in `u = H^2 + |z - z_k|^2`,
    /// composed with the convex `u(z)`; concave and globally below the
    /// received power.
    ConcaveLower,
}

/// Surrogate of `g(z) = |h_k(z)^H x_j|^2 = C / (1 + (H^2 + |z - z_k|^2)^(gamma/2))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalPowerSurrogate<T> {
    pub kind: PowerBound,
    /// `C = M |alpha_k|^2 |a(theta_k)^H x_j|^2`.
    pub coefficient: T,
    pub user_xy: [T; 2],
    pub reference: [T; 2],
    height: T,
    half_exponent: T,
}

impl<T: Real> SignalPowerSurrogate<T> {
    fn sq_height(&self) -> T {
        self.height * self.height
    }

    /// `u(z) = H^2 + |z - z_k|^2`.
    pub fn distance_sq(&self, z: [T; 2]) -> T {
        let dx = z[0] - self.user_xy[0];
        let dy = z[1] - self.user_xy[1];
        self.sq_height() + dx * dx + dy * dy
    }

    /// Path-loss reciprocal `1 / (1 + u^p)`.
    fn inv_pl(&self, u: T) -> T {
        T::one() / (T::one() + u.powf(self.half_exponent))
    }

    fn inv_pl_slope(&self, u: T) -> T {
        let p = self.half_exponent;
        let up = u.powf(p);
        -p * u.powf(p - T::one()) / ((T::one() + up) * (T::one() + up))
    }

    /// Exact received power at `z`.
    pub fn true_value(&self, z: [T; 2]) -> T {
        self.coefficient * self.inv_pl(self.distance_sq(z))
    }

    pub fn value_at_ref(&self) -> T {
        self.true_value(self.reference)
    }

    /// Gradient of the true function (and of every variant) at the reference.
    pub fn gradient_at_ref(&self) -> [T; 2] {
        let u = self.distance_sq(self.reference);
        let s = self.coefficient * self.inv_pl_slope(u) * T::lit(2.0);
        [
            s * (self.reference[0] - self.user_xy[0]),
            s * (self.reference[1] - self.user_xy[1]),
        ]
    }

    /// Tangent of `u(z)` at the reference (a global under-estimate of `u`).
    pub fn distance_sq_tangent(&self, z: [T; 2]) -> T {
        let r = self.reference;
        let two = T::lit(2.0);
        self.distance_sq(r)
            + two * (r[0] - self.user_xy[0]) * (z[0] - r[0])
            + two * (r[1] - self.user_xy[1]) * (z[1] - r[1])
    }

    pub fn evaluate(&self, z: [T; 2]) -> Result<T> {
        match self.kind {
            PowerBound::Lower => self.tangent().evaluate(&z),
            PowerBound::Upper => {
                let u = self.distance_sq_tangent(z);
                if u <= T::zero() {
                    return Err(Error::ShrinkStep);
                }
                Ok(self.coefficient * self.inv_pl(u))
            }
            PowerBound::ConcaveLower => {
                let ur = self.distance_sq(self.reference);
                let u = self.distance_sq(z);
                Ok(self.coefficient * (self.inv_pl(ur) + self.inv_pl_slope(ur) * (u - ur)))
            }
        }
    }

    pub fn bound_direction(&self) -> BoundDirection {
        match self.kind {
            PowerBound::Lower => BoundDirection::Local,
            PowerBound::Upper => BoundDirection::Upper,
            PowerBound::ConcaveLower => BoundDirection::Lower,
        }
    }

    /// First-order expansion at the reference.
    pub fn tangent(&self) -> AffineSurrogate<T> {
        AffineSurrogate {
            reference_point: self.reference.to_vec(),
            gradient: self.gradient_at_ref().to_vec(),
            value_at_ref: self.value_at_ref(),
            bound_direction: BoundDirection::Local,
        }
    }
}

/// Surrogate in the UAV position of the power user `user` receives from
/// beamformer column `column`, with the AoD frozen at its current value.
pub fn signal_power_surrogate_z<T: Real>(
    cfg: &SystemConfig<T>,
    x: &Beamformer<T>,
    user: &UserTerminal<T>,
    column: usize,
    reference: [T; 2],
    kind: PowerBound,
) -> Result<SignalPowerSurrogate<T>> {
    if column > x.num_users() {
        return Err(Error::IndexOutOfRange {
            index: column,
            max: x.num_users(),
        });
    }
    let a = steering_vector(user.aod, cfg.num_antennas, cfg.spacing_ratio, true)?;
    let coefficient = T::lit(cfg.num_antennas as f64) * user.fading.norm_sqr() * inner(&a, x.column(column)).norm_sqr();
    Ok(SignalPowerSurrogate {
        kind,
        coefficient,
        user_xy: user.position,
        reference,
        height: cfg.uav_height,
        half_exponent: cfg.pathloss_exponent / T::lit(2.0),
    })
}

/// DC upper bound of the product `f * g` tangent at `(f_ref, g_ref)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BilinearUpperBound<T> {
    pub f_ref: T,
    pub g_ref: T,
    /// `true` for the quarter form built from `fg = ((f+g)^2 - (f-g)^2)/4`.
    pub quarter: bool,
}

/// `1/2 (f+g)^2 - 1/2 (f_r^2 + g_r^2) - f_r (f - f_r) - g_r (g - g_r)`, which
/// exceeds `f g` by exactly `1/2 (f - f_r)^2 + 1/2 (g - g_r)^2`.
pub fn bilinear_upper_bound<T: Real>(f_ref: T, g_ref: T) -> BilinearUpperBound<T> {
    BilinearUpperBound {
        f_ref,
        g_ref,
        quarter: false,
    }
}

/// `1/4 [(f+g)^2 - 2 (f_r - g_r)(f - g) + (f_r - g_r)^2]`, which exceeds
/// `f g` by `1/4 ((f - g) - (f_r - g_r))^2`.
pub fn bilinear_upper_bound_quarter<T: Real>(f_ref: T, g_ref: T) -> BilinearUpperBound<T> {
    BilinearUpperBound {
        f_ref,
        g_ref,
        quarter: true,
    }
}

impl<T: Real> BilinearUpperBound<T> {
    pub fn evaluate(&self, f: T, g: T) -> T {
        let (fr, gr) = (self.f_ref, self.g_ref);
        let half = T::lit(0.5);
        if self.quarter {
            let dr = fr - gr;
            T::lit(0.25) * ((f + g) * (f + g) - T::lit(2.0) * dr * (f - g) + dr * dr)
        } else {
            half * (f + g) * (f + g) - half * (fr * fr + gr * gr) - fr * (f - fr) - gr * (g - gr)
        }
    }

    pub fn gradient(&self, f: T, g: T) -> [T; 2] {
        if self.quarter {
            let dr = self.f_ref - self.g_ref;
            let s = T::lit(0.5) * (f + g);
            [s - T::lit(0.5) * dr, s + T::lit(0.5) * dr]
        } else {
            [f + g - self.f_ref, f + g - self.g_ref]
        }
    }
}

/// Scale `a` such that `a f_ref = g_ref / a`; applying the DC bounds to
/// `(a f, g / a)` keeps the product unchanged and balances the curvature.
pub fn balanced_scale<T: Real>(f_ref: T, g_ref: T) -> T {
    (g_ref / f_ref).sqrt()
}

/// Tangent of the concave `sqrt(f g)` at `(f_ref, g_ref)`, as an affine
/// function of `(f, g)`; it lies above `sqrt(f g)` on the positive orthant,
/// so `Re(h^H x) >= tangent` implies `|h^H x|^2 >= f g`.
pub fn sqrt_bilinear_lower_bound<T: Real>(f_ref: T, g_ref: T) -> Result<AffineSurrogate<T>> {
    if !(f_ref > T::zero()) || !(g_ref > T::zero()) {
        return Err(Error::InvalidArgument(format!(
            "sqrt tangent needs positive references, got ({f_ref}, {g_ref})"
        )));
    }
    let half = T::lit(0.5);
    Ok(AffineSurrogate {
        reference_point: vec![f_ref, g_ref],
        gradient: vec![half * (g_ref / f_ref).sqrt(), half * (f_ref / g_ref).sqrt()],
        value_at_ref: (f_ref * g_ref).sqrt(),
        bound_direction: BoundDirection::Upper,
    })
}

/// Tangent of the convex `|h^H x_c|^2` at `x_ref`:
/// `2 Re(x_ref^H h h^H x_c) - |h^H x_ref|^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticSignalBound<T> {
    pub channel: Vec<Complex<T>>,
    /// `h^H x_ref`.
    pub reference_gain: Complex<T>,
}

pub fn quadratic_signal_lower_bound_x<T: Real>(
    h: &[Complex<T>],
    x_ref: &[Complex<T>],
) -> Result<QuadraticSignalBound<T>> {
    if h.len() != x_ref.len() {
        return Err(Error::DimensionMismatch("channel and precoder lengths differ".into()));
    }
    Ok(QuadraticSignalBound {
        channel: h.to_vec(),
        reference_gain: inner(h, x_ref),
    })
}

impl<T: Real> QuadraticSignalBound<T> {
    pub fn evaluate(&self, x: &[Complex<T>]) -> T {
        let w = inner(&self.channel, x);
        let g = self.reference_gain;
        T::lit(2.0) * (g.conj() * w).re - g.norm_sqr()
    }

    /// The bound as an affine function of the real-vectorized precoder.
    pub fn as_affine(&self, x_ref: &[Complex<T>]) -> AffineSurrogate<T> {
        AffineSurrogate {
            reference_point: x_ref.iter().flat_map(|v| [v.re, v.im]).collect(),
            gradient: gain_gradient(&self.channel, self.reference_gain).flatten().collect(),
            value_at_ref: self.reference_gain.norm_sqr(),
            bound_direction: BoundDirection::Lower,
        }
    }
}

/// Expansion variable for [`beampattern_surrogate`].
#[derive(Debug, Clone, Copy)]
pub enum BeampatternVariable<'a, T> {
    /// Expand in the UAV position; the beamformer is held fixed.
    Location { reference: [T; 2], beamformers: &'a Beamformer<T> },
    /// Expand in the real-vectorized beamformer.
    Beamformers { reference: &'a Beamformer<T> },
}

/// First-order expansion of the beampattern MSE. The MSE is quartic in the
/// beamformer, so the result is only locally valid.
pub fn beampattern_surrogate<T: Real>(
    variable: BeampatternVariable<'_, T>,
    targets: &[RadarTarget<T>],
    spacing_ratio: T,
) -> Result<AffineSurrogate<T>> {
    match variable {
        BeampatternVariable::Location {
            reference,
            beamformers,
        } => Ok(AffineSurrogate {
            reference_point: reference.to_vec(),
            // Target angles are fixed in the UAV frame, so the MSE has no z dependence.
            gradient: vec![T::zero(); 2],
            value_at_ref: beampattern_mse(beamformers, targets, spacing_ratio)?,
            bound_direction: BoundDirection::Local,
        }),
        BeampatternVariable::Beamformers { reference } => {
            let value = beampattern_mse(reference, targets, spacing_ratio)?;
            let mut gradient = vec![T::zero(); 2 * reference.num_antennas() * (reference.num_users() + 1)];
            for t in targets {
                let a = steering_vector(t.angle, reference.num_antennas(), spacing_ratio, false)?;
                let gains: Vec<Complex<T>> = reference.columns().map(|c| inner(&a, c)).collect();
                let level = gains.iter().fold(T::zero(), |acc, g| acc + g.norm_sqr());
                let weight = T::lit(2.0) * (level - t.level);
                let per_column = gains.iter().flat_map(|w| gain_gradient(&a, *w)).flatten();
                for (g, d) in gradient.iter_mut().zip(per_column) {
                    *g += weight * d;
                }
            }
            Ok(AffineSurrogate {
                reference_point: vectorize(reference),
                gradient,
                value_at_ref: value,
                bound_direction: BoundDirection::Local,
            })
        }
    }
}

/// Rotates each private column so that `h_k^H x_k` is real and non-negative.
/// Zero inner products leave the column untouched.
pub fn rotate_beamformer<T: Real>(x: &Beamformer<T>, channels: &ChannelSet<T>) -> Beamformer<T> {
    let mut out = x.clone();
    for (k, h) in channels.channels.iter().enumerate().take(x.num_users()) {
        let w = inner(h, x.column(k + 1));
        if w.norm() == T::zero() {
            continue;
        }
        let phase = Complex::from_polar(T::one(), -w.arg());
        out.column_mut(k + 1).iter_mut().for_each(|v| *v *= phase);
    }
    out
}
