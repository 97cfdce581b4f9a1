//! Drop geometry, large- and small-scale channel state, Doppler-driven
//! estimation error and SINR evaluation.

mod bessel;
mod fading;
mod geometry;
mod sinr;

pub use bessel::{bessel_j0, J0_MAX_ARG};
pub use fading::{
    generate_link_state, large_scale_gain, sample_true_channel, ChannelRealization, LinkState,
    Pathloss, SampleSet,
};
pub use geometry::{generate_geometry, Geometry};
pub use sinr::{sinr_cue, sinr_cue_reuse, sinr_vue, sinr_vue_reuse};

use crate::config::SPEED_OF_LIGHT;
use crate::error::ModelError;

/// Jakes correlation between the true and the fed-back channel.
///
/// λ = J0(2π f_s T) with f_s = v f_v / c, v in km/h.
pub fn doppler_coefficient(speed_kmh: f64, carrier_hz: f64, delay_s: f64) -> Result<f64, ModelError> {
    let fs = speed_kmh / 3.6 * carrier_hz / SPEED_OF_LIGHT;
    let lambda = bessel_j0(2.0 * std::f64::consts::PI * fs * delay_s)?;
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(ModelError::DopplerRange(lambda));
    }
    Ok(lambda)
}
