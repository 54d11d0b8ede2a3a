//! Energy-efficiency maximization for a UAV that serves rate-splitting
//! multiple-access (RSMA) downlink users while shaping a MIMO-radar transmit
//! beampattern.
//!
//! The crate is layered bottom-up:
//!
//! * [`model`]: closed-form channels, SINRs, rates, beampattern error and energy efficiency.
//! * [`linearize`]: convex surrogates (first-order expansions, DC bounds) used by the SCA loops.
//! * [`program`] and [`solver`]: a solver-agnostic conic program and its interior-point backend.
//! * [`subproblems`]: UAV placement SCA, Dinkelbach beamforming and the alternating outer loop.
//! * [`baselines`]: NOMA and OMA comparators sharing the same machinery.
//! * [`oracle`]: brute-force checks that share no code with the optimization paths.
//!
//! Physics and surrogates are generic over the scalar type; the optimization
//! layers run in `f64` and use the aliases below.

// `!(x > 0.0)` style checks are used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod error;
pub mod linearize;
pub mod model;
pub mod oracle;
pub mod program;
pub mod scalar;
pub mod scheme;
pub mod solver;
pub mod subproblems;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision complex sample.
pub type Cplx = num_complex::Complex<f64>;
/// Scenario constants in `f64`.
pub type Config = model::SystemConfig<f64>;
/// Ground user in `f64`.
pub type User = model::UserTerminal<f64>;
/// Precoder matrix in `f64`.
pub type Beams = model::Beamformer<f64>;
/// Operating point in `f64`.
pub type Point = model::OperatingPoint<f64>;
/// Channel set in `f64`.
pub type Channels = model::ChannelSet<f64>;
/// Single-precision scenario constants.
pub type ConfigF32 = model::SystemConfig<f32>;
/// Single-precision precoder matrix.
pub type BeamsF32 = model::Beamformer<f32>;
