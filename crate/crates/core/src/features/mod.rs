//! Per-sensor feature extraction from raw recordings.
//!
//! | sensor | dim | source |
//! |--------|-----|--------|
//! | Acc, Gyro | 26 | magnitude statistics, spectrum, autocorrelation, per-axis statistics |
//! | WAcc | 46 | the 26 above, per-axis band energies, relative directions |
//! | Loc | 17 | quick features plus update-derived statistics |
//! | Aud | 26 | per-coefficient MFCC mean and std |
//! | PS | 34 | one-hot phone state plus time-of-day bins |

use std::collections::BTreeMap;

use thiserror::Error;

use crate::sensor::{Example, FeatureVector, Sensor, SensorError};

mod location;
mod mfcc;
mod motion;
pub mod names;
mod phone_state;
pub mod signal;

pub use location::{extract_location_features, quick_features_from_updates, LOG_RANGE_EPSILON};
pub use mfcc::{
    compute_mfcc, compute_mfcc_with, extract_audio_features, frame_count, mel_filterbank, normalize_audio, MfccConfig,
    AUDIO_SAMPLE_RATE,
};
pub use motion::{
    axis_statistics, extract_motion_features, extract_watch_features, relative_direction_features,
    LAG_BUCKET_EDGES,
};
pub use phone_state::{extract_phone_state_features, time_bins, ONE_HOT_GROUPS, TIME_BIN_STARTS};
pub use signal::{magnitude_series, scalar_series_features};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("empty signal")]
    EmptySignal,
    #[error("signal too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },
    #[error("audio too short: need at least {needed} samples, got {got}")]
    AudioTooShort { needed: usize, got: usize },
    #[error("invalid spectral configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Sensor(#[from] SensorError),
}

/// Sub-band layout for spectral features. The last band is open-ended and
/// includes the Nyquist frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralConfig {
    lower_edges_hz: Vec<f64>,
    pub log_floor_epsilon: f64,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            lower_edges_hz: vec![0.0, 0.5, 1.0, 3.0, 5.0],
            log_floor_epsilon: 1e-12,
        }
    }
}

impl SpectralConfig {
    /// `lower_edges_hz` are the lower edges of consecutive half-open bands; the
    /// final band runs to Nyquist inclusive.
    pub fn new(lower_edges_hz: Vec<f64>, log_floor_epsilon: f64) -> Result<Self, FeatureError> {
        if lower_edges_hz.is_empty() {
            return Err(FeatureError::InvalidConfig("no band edges".into()));
        }
        if lower_edges_hz.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(FeatureError::InvalidConfig(
                "band edges must be strictly increasing".into(),
            ));
        }
        if !(log_floor_epsilon > 0.0) {
            return Err(FeatureError::InvalidConfig("epsilon must be positive".into()));
        }
        Ok(Self {
            lower_edges_hz,
            log_floor_epsilon,
        })
    }

    pub fn band_count(&self) -> usize {
        self.lower_edges_hz.len()
    }

    pub fn lower_edges_hz(&self) -> &[f64] {
        &self.lower_edges_hz
    }

    pub fn band_of(&self, freq: f64) -> Option<usize> {
        self.lower_edges_hz.iter().rposition(|&e| freq >= e)
    }
}

/// Extracts a feature vector for every sensor with a raw payload.
pub fn extract_features(
    example: &Example,
    config: &SpectralConfig,
) -> Result<BTreeMap<Sensor, FeatureVector>, FeatureError> {
    let data = &example.sensor_data;
    let mut out = BTreeMap::new();
    if let Some(s) = &data.acc {
        out.insert(Sensor::Acc, extract_motion_features(Sensor::Acc, s, config)?);
    }
    if let Some(s) = &data.gyro {
        out.insert(Sensor::Gyro, extract_motion_features(Sensor::Gyro, s, config)?);
    }
    if let Some(s) = &data.watch_acc {
        out.insert(Sensor::WAcc, extract_watch_features(s, config)?);
    }
    if let Some(loc) = &data.location {
        out.insert(Sensor::Loc, extract_location_features(loc));
    }
    if let Some(aud) = &data.audio {
        out.insert(Sensor::Aud, extract_audio_features(aud)?);
    }
    if let Some(ps) = &data.phone_state {
        out.insert(Sensor::Ps, extract_phone_state_features(ps));
    }
    Ok(out)
}
