//! System model: geometry, LoS channels, RSMA SINRs and rates, the radar
//! beampattern error, power consumption and energy efficiency.
//!
//! Every function here is a direct closed-form evaluation; the surrogates in
//! [`crate::linearize`] and the oracles in [`crate::oracle`] are validated
//! against these.

mod feasibility;
mod physics;
mod types;

pub use feasibility::{check_feasibility, FeasibilityReport};
pub use physics::{
    achievable_rates, aod_from_geometry, beampattern_level, beampattern_mse, channel_vector, common_sinr,
    energy_efficiency, inner, link_distance, metrics, path_loss, private_sinr, steering_vector, ChannelSet,
    Metrics, Rates,
};
pub use types::{
    default_radar_level, Beamformer, OperatingPoint, PowerModel, RadarTarget, SystemConfig, UserTerminal,
    DEFAULT_QOS, DEFAULT_RADAR_LEVEL_RATIO, DEFAULT_RADAR_REFERENCE_DBM,
};
