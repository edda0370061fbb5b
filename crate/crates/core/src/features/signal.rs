//! Features of a scalar time series: distribution statistics, sub-band log
//! energies, spectral entropy and dominant periodicity.

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::{FeatureError, SpectralConfig};
use crate::stats;

/// Number of values produced by [`scalar_series_features`].
pub const SCALAR_FEATURES: usize = 17;
pub const VALUE_ENTROPY_BINS: usize = 20;
pub const MIN_SIGNAL_LEN: usize = 8;

/// Euclidean norm of every 3-vector.
pub fn magnitude_series(samples: &[[f64; 3]]) -> Result<Vec<f64>, FeatureError> {
    if samples.is_empty() {
        return Err(FeatureError::EmptySignal);
    }
    Ok(samples
        .iter()
        .map(|[x, y, z]| (x * x + y * y + z * z).sqrt())
        .collect())
}

/// Entropy of a 20-bin histogram spanning `[min, max]`; 0 when all values are equal.
pub fn value_entropy(signal: &[f64]) -> f64 {
    let lo = signal.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = signal.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return 0.0;
    }
    let width = hi - lo;
    let mut counts = [0.0f64; VALUE_ENTROPY_BINS];
    for &v in signal {
        let bin = (((v - lo) / width) * VALUE_ENTROPY_BINS as f64) as usize;
        counts[bin.min(VALUE_ENTROPY_BINS - 1)] += 1.0;
    }
    stats::entropy_of_weights(&counts)
}

/// Entropy of the signal's absolute values normalized to sum to one.
/// An all-zero signal is treated as uniform.
pub fn time_entropy(signal: &[f64]) -> f64 {
    let weights: Vec<f64> = signal.iter().map(|v| v.abs()).collect();
    if weights.iter().sum::<f64>() <= 0.0 {
        return (signal.len() as f64).ln();
    }
    stats::entropy_of_weights(&weights)
}

/// Two-sided power spectrum of the mean-removed signal, scaled so that the
/// total equals the mean power `Σ (x - mean)² / n`.
pub fn power_spectrum(signal: &[f64]) -> Vec<f64> {
    let n = signal.len();
    let m = stats::mean(signal);
    let mut buf: Vec<Complex<f64>> = signal.iter().map(|&v| Complex::new(v - m, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / (n as f64 * n as f64);
    buf.iter().map(|c| c.norm_sqr() * scale).collect()
}

/// Absolute frequency of DFT bin `k` for a length-`n` transform.
fn bin_frequency(k: usize, n: usize, rate: f64) -> f64 {
    k.min(n - k) as f64 * rate / n as f64
}

/// Linear (non-log) energy per configured band.
pub fn band_energies(signal: &[f64], rate: f64, config: &SpectralConfig) -> Vec<f64> {
    let n = signal.len();
    let power = power_spectrum(signal);
    let mut bands = vec![0.0; config.band_count()];
    for (k, p) in power.iter().enumerate() {
        if let Some(b) = config.band_of(bin_frequency(k, n, rate)) {
            bands[b] += p;
        }
    }
    bands
}

pub fn band_log_energies(signal: &[f64], rate: f64, config: &SpectralConfig) -> Vec<f64> {
    band_energies(signal, rate, config)
        .into_iter()
        .map(|e| (e + config.log_floor_epsilon).ln())
        .collect()
}

/// Entropy of the one-sided power spectrum (bins 0..=n/2) of the mean-removed signal.
pub fn spectral_entropy(signal: &[f64]) -> f64 {
    let n = signal.len();
    let power = power_spectrum(signal);
    let half = n / 2;
    let one_sided: Vec<f64> = (0..=half)
        .map(|k| {
            if k == 0 || 2 * k == n {
                power[k]
            } else {
                power[k] + power[n - k]
            }
        })
        .collect();
    stats::entropy_of_weights(&one_sided)
}

/// Autocorrelation of the mean-removed signal for lags `0..n`, normalized to 1 at lag 0.
/// Returns `None` for a zero-variance signal.
pub fn normalized_autocorrelation(signal: &[f64]) -> Option<Vec<f64>> {
    let n = signal.len();
    let m = stats::mean(signal);
    let padded = (2 * n).next_power_of_two();
    let mut buf = vec![Complex::new(0.0, 0.0); padded];
    for (b, &v) in buf.iter_mut().zip(signal) {
        b.re = v - m;
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(padded).process(&mut buf);
    for c in &mut buf {
        *c = Complex::new(c.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(padded).process(&mut buf);
    let r0 = buf[0].re;
    let energy: f64 = signal.iter().map(|v| (v - m) * (v - m)).sum();
    if !(energy > 0.0) || !(r0 > 0.0) {
        return None;
    }
    Some(
        buf[..n]
            .iter()
            .map(|c| (c.re / r0).clamp(-1.0, 1.0))
            .collect(),
    )
}

/// Dominant periodicity in seconds and its normalized autocorrelation value.
///
/// The main lobe ends at the first lag whose autocorrelation is negative; the
/// period is the lag of the highest value past that point. When the
/// autocorrelation never turns negative the result is `(duration, 0)`.
pub fn dominant_periodicity(signal: &[f64], rate: f64) -> (f64, f64) {
    let duration = signal.len() as f64 / rate;
    let Some(ac) = normalized_autocorrelation(signal) else {
        return (duration, 0.0);
    };
    let Some(lobe_end) = ac.iter().position(|&r| r < 0.0) else {
        return (duration, 0.0);
    };
    let mut best = lobe_end;
    for lag in lobe_end..ac.len() {
        if ac[lag] > ac[best] {
            best = lag;
        }
    }
    (best as f64 / rate, ac[best])
}

/// The 17 scalar-series features, in order: mean, std, third and fourth
/// central moments, 25th/50th/75th percentiles, value entropy, time entropy,
/// the band log energies, spectral entropy, dominant period and its
/// autocorrelation value.
pub fn scalar_series_features(
    signal: &[f64],
    rate: f64,
    config: &SpectralConfig,
) -> Result<Vec<f64>, FeatureError> {
    if signal.len() < MIN_SIGNAL_LEN {
        return Err(FeatureError::TooShort {
            needed: MIN_SIGNAL_LEN,
            got: signal.len(),
        });
    }
    if config.band_count() != 5 {
        return Err(FeatureError::InvalidConfig(format!(
            "scalar features expect 5 bands, config has {}",
            config.band_count()
        )));
    }
    let mean = stats::mean(signal);
    let mut sorted = signal.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out = Vec::with_capacity(SCALAR_FEATURES);
    out.push(mean);
    out.push(stats::central_moment(signal, mean, 2).sqrt());
    out.push(stats::central_moment(signal, mean, 3));
    out.push(stats::central_moment(signal, mean, 4));
    for q in [25.0, 50.0, 75.0] {
        out.push(stats::percentile_sorted(&sorted, q));
    }
    out.push(value_entropy(signal));
    out.push(time_entropy(signal));
    out.extend(band_log_energies(signal, rate, config));
    out.push(spectral_entropy(signal));
    let (period, value) = dominant_periodicity(signal, rate);
    out.push(period);
    out.push(value);
    debug_assert_eq!(out.len(), SCALAR_FEATURES);
    Ok(out)
}
