//! MFCC computation for 22,050 Hz audio and the per-coefficient summary features.
//!
//! Chain per frame: remove the frame mean, periodic Hann window, power
//! spectrum, 40 triangular HTK-Mel filters spanning 0 Hz to Nyquist,
//! `ln(energy + 1e-10)`, orthonormal DCT-II, keep coefficients 0..=12.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use super::FeatureError;
use crate::sensor::{AudioMfccSeries, FeatureVector, Sensor, MFCC_COEFFICIENTS};
use crate::stats;

pub const AUDIO_SAMPLE_RATE: f64 = 22_050.0;

#[derive(Debug, Clone, PartialEq)]
pub struct MfccConfig {
    pub sample_rate: f64,
    pub frame_len: usize,
    pub hop: usize,
    pub mel_bands: usize,
    pub coefficients: usize,
    pub log_epsilon: f64,
}

impl Default for MfccConfig {
    fn default() -> Self {
        Self {
            sample_rate: AUDIO_SAMPLE_RATE,
            frame_len: 2048,
            hop: 1024,
            mel_bands: 40,
            coefficients: MFCC_COEFFICIENTS,
            log_epsilon: 1e-10,
        }
    }
}

fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Number of frames for `n` samples: `floor((n - frame) / hop) + 1`.
pub fn frame_count(n: usize, config: &MfccConfig) -> usize {
    if n < config.frame_len {
        0
    } else {
        (n - config.frame_len) / config.hop + 1
    }
}

/// Triangular Mel filter weights, one row per band over bins `0..=frame_len/2`.
pub fn mel_filterbank(config: &MfccConfig) -> Vec<Vec<f64>> {
    let bins = config.frame_len / 2 + 1;
    let nyquist = config.sample_rate / 2.0;
    let top = hz_to_mel(nyquist);
    let edges: Vec<f64> = (0..config.mel_bands + 2)
        .map(|i| mel_to_hz(top * i as f64 / (config.mel_bands + 1) as f64))
        .collect();
    (0..config.mel_bands)
        .map(|m| {
            let (lo, center, hi) = (edges[m], edges[m + 1], edges[m + 2]);
            (0..bins)
                .map(|k| {
                    let f = k as f64 * config.sample_rate / config.frame_len as f64;
                    if f <= lo || f >= hi {
                        0.0
                    } else if f <= center {
                        (f - lo) / (center - lo)
                    } else {
                        (hi - f) / (hi - center)
                    }
                })
                .collect()
        })
        .collect()
}

/// Scales audio to a maximal absolute value of 1. Returns the samples and the
/// divisor used (1 for silent input).
pub fn normalize_audio(samples: &[f64]) -> (Vec<f64>, f64) {
    let peak = samples.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let factor = if peak > 0.0 { peak } else { 1.0 };
    (samples.iter().map(|v| v / factor).collect(), factor)
}

/// MFCC frames of 22,050 Hz audio using the default configuration.
pub fn compute_mfcc(audio: &[f64]) -> Result<AudioMfccSeries, FeatureError> {
    compute_mfcc_with(audio, &MfccConfig::default())
}

pub fn compute_mfcc_with(audio: &[f64], config: &MfccConfig) -> Result<AudioMfccSeries, FeatureError> {
    if audio.len() < config.frame_len {
        return Err(FeatureError::AudioTooShort {
            needed: config.frame_len,
            got: audio.len(),
        });
    }
    let (audio, factor) = normalize_audio(audio);
    let n = config.frame_len;
    let window: Vec<f64> = (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * PI * i as f64 / n as f64).cos())
        .collect();
    let filters = mel_filterbank(config);
    let bands = config.mel_bands;
    let dct: Vec<Vec<f64>> = (0..config.coefficients)
        .map(|j| {
            let scale = if j == 0 {
                (1.0 / bands as f64).sqrt()
            } else {
                (2.0 / bands as f64).sqrt()
            };
            (0..bands)
                .map(|m| scale * (PI * j as f64 * (m as f64 + 0.5) / bands as f64).cos())
                .collect()
        })
        .collect();
    let fft = FftPlanner::new().plan_fft_forward(n);
    let mut buf = vec![Complex::new(0.0, 0.0); n];
    let frames = (0..frame_count(audio.len(), config))
        .map(|f| {
            let frame = &audio[f * config.hop..f * config.hop + n];
            let m = stats::mean(frame);
            for ((b, &x), &w) in buf.iter_mut().zip(frame).zip(&window) {
                *b = Complex::new((x - m) * w, 0.0);
            }
            fft.process(&mut buf);
            let power: Vec<f64> = buf[..=n / 2].iter().map(|c| c.norm_sqr() / n as f64).collect();
            let log_mel: Vec<f64> = filters
                .iter()
                .map(|row| {
                    let e: f64 = row.iter().zip(&power).map(|(w, p)| w * p).sum();
                    (e + config.log_epsilon).ln()
                })
                .collect();
            dct.iter()
                .map(|basis| basis.iter().zip(&log_mel).map(|(b, l)| b * l).sum())
                .collect()
        })
        .collect();
    Ok(AudioMfccSeries {
        frames,
        normalization_factor: factor,
    })
}

/// Per-coefficient means followed by per-coefficient standard deviations.
pub fn extract_audio_features(mfcc: &AudioMfccSeries) -> Result<FeatureVector, FeatureError> {
    if mfcc.frames.is_empty() {
        return Err(FeatureError::EmptySignal);
    }
    let width = MFCC_COEFFICIENTS;
    if let Some(bad) = mfcc.frames.iter().find(|f| f.len() != width) {
        return Err(FeatureError::InvalidConfig(format!(
            "MFCC frame has {} coefficients, expected {width}",
            bad.len()
        )));
    }
    let columns: Vec<Vec<f64>> = (0..width)
        .map(|c| mfcc.frames.iter().map(|f| f[c]).collect())
        .collect();
    let mut values: Vec<f64> = columns.iter().map(|c| stats::mean(c)).collect();
    values.extend(columns.iter().map(|c| stats::pop_std(c)));
    Ok(FeatureVector::from_optional(Sensor::Aud, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Textbook MFCC with a direct DFT and independently built filters.
    fn reference_mfcc(audio: &[f64]) -> Vec<Vec<f64>> {
        let peak = audio.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let x: Vec<f64> = audio.iter().map(|v| v / peak).collect();
        let n = 2048usize;
        let sr = 22_050.0;
        let mel = |f: f64| 2595.0 * (1.0 + f / 700.0).log10();
        let inv = |m: f64| 700.0 * (10f64.powf(m / 2595.0) - 1.0);
        let step = mel(sr / 2.0) / 41.0;
        let pts: Vec<f64> = (0..42).map(|i| inv(step * i as f64)).collect();
        let mut out = Vec::new();
        let mut start = 0;
        while start + n <= x.len() {
            let frame = &x[start..start + n];
            let mean = frame.iter().sum::<f64>() / n as f64;
            let w: Vec<f64> = frame
                .iter()
                .enumerate()
                .map(|(i, v)| (v - mean) * (1.0 - (2.0 * PI * i as f64 / n as f64).cos()) / 2.0)
                .collect();
            let power: Vec<f64> = (0..=n / 2)
                .map(|k| {
                    let (mut re, mut im) = (0.0, 0.0);
                    for (t, v) in w.iter().enumerate() {
                        let a = 2.0 * PI * ((k * t) % n) as f64 / n as f64;
                        re += v * a.cos();
                        im -= v * a.sin();
                    }
                    (re * re + im * im) / n as f64
                })
                .collect();
            let logmel: Vec<f64> = (1..=40)
                .map(|m| {
                    let mut e = 0.0;
                    for (k, p) in power.iter().enumerate() {
                        let f = k as f64 * sr / n as f64;
                        let wgt = if f > pts[m - 1] && f <= pts[m] {
                            (f - pts[m - 1]) / (pts[m] - pts[m - 1])
                        } else if f > pts[m] && f < pts[m + 1] {
                            (pts[m + 1] - f) / (pts[m + 1] - pts[m])
                        } else {
                            0.0
                        };
                        e += wgt * p;
                    }
                    (e + 1e-10).ln()
                })
                .collect();
            let coeffs = (0..13)
                .map(|j| {
                    let s: f64 = logmel
                        .iter()
                        .enumerate()
                        .map(|(m, l)| l * (PI * j as f64 * (2 * m + 1) as f64 / 80.0).cos())
                        .sum();
                    s * if j == 0 { (1.0f64 / 40.0).sqrt() } else { (2.0f64 / 40.0).sqrt() }
                })
                .collect();
            out.push(coeffs);
            start += 1024;
        }
        out
    }

    #[test]
    fn twenty_seconds_yields_429_frames() {
        assert_eq!(frame_count(441_000, &MfccConfig::default()), 429);
    }

    #[test]
    fn too_short_audio() {
        assert!(matches!(compute_mfcc(&[0.1; 2047]), Err(FeatureError::AudioTooShort { .. })));
    }

    #[test]
    fn constant_signal_is_flat() {
        let m = compute_mfcc(&vec![0.3; 4096]).unwrap();
        assert_eq!(m.frames.len(), 3);
        for f in &m.frames {
            assert!(f[0].abs() > 1.0);
            for c in &f[1..] {
                assert!(c.abs() < 1e-6, "{c}");
            }
        }
    }

    #[test]
    fn white_noise_matches_reference() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let audio: Vec<f64> = (0..2048 * 3).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
        let fast = compute_mfcc(&audio).unwrap();
        let slow = reference_mfcc(&audio);
        assert_eq!(fast.frames.len(), slow.len());
        for (a, b) in fast.frames.iter().zip(&slow) {
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-6, "{x} vs {y}");
            }
        }
    }

    #[test]
    fn single_frame_audio_features() {
        let frame: Vec<f64> = (0..13).map(|i| i as f64).collect();
        let fv = extract_audio_features(&AudioMfccSeries {
            frames: vec![frame.clone()],
            normalization_factor: 1.0,
        })
        .unwrap();
        assert_eq!(&fv.values()[..13], frame.as_slice());
        assert!(fv.values()[13..].iter().all(|&v| v == 0.0));
    }

    #[test]
    fn hand_computed_column_statistics() {
        let frames = vec![vec![1.0; 13], vec![2.0; 13], vec![6.0; 13]];
        let fv = extract_audio_features(&AudioMfccSeries {
            frames,
            normalization_factor: 1.0,
        })
        .unwrap();
        // mean 3, population variance (4 + 1 + 9) / 3
        let std = (14.0f64 / 3.0).sqrt();
        for c in 0..13 {
            assert!((fv.values()[c] - 3.0).abs() < 1e-12);
            assert!((fv.values()[13 + c] - std).abs() < 1e-12);
        }
    }
}
