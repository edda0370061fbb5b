//! Phone accelerometer/gyroscope and watch accelerometer features.

use super::signal::{band_log_energies, magnitude_series, scalar_series_features};
use super::{FeatureError, SpectralConfig};
use crate::sensor::{FeatureVector, Sensor, TriaxialSeries};
use crate::stats;

/// Lower edges (seconds) of the time-lag buckets for relative-direction features.
pub const LAG_BUCKET_EDGES: [f64; 5] = [0.0, 0.5, 1.0, 5.0, 10.0];

/// Per-axis means, per-axis stds, then correlations (x,y), (x,z), (y,z).
pub fn axis_statistics(series: &TriaxialSeries) -> Result<Vec<f64>, FeatureError> {
    if series.len() < 2 {
        return Err(FeatureError::TooShort {
            needed: 2,
            got: series.len(),
        });
    }
    let axes: Vec<Vec<f64>> = (0..3).map(|a| series.axis(a)).collect();
    let mut out = Vec::with_capacity(9);
    out.extend(axes.iter().map(|a| stats::mean(a)));
    out.extend(axes.iter().map(|a| stats::pop_std(a)));
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        out.push(stats::pearson(&axes[i], &axes[j]));
    }
    Ok(out)
}

fn base_features(series: &TriaxialSeries, config: &SpectralConfig) -> Result<Vec<f64>, FeatureError> {
    let magnitude = magnitude_series(&series.samples)?;
    let mut out = scalar_series_features(&magnitude, series.nominal_rate, config)?;
    out.extend(axis_statistics(series)?);
    Ok(out)
}

/// The 26 features of a phone accelerometer or gyroscope recording.
pub fn extract_motion_features(
    sensor: Sensor,
    series: &TriaxialSeries,
    config: &SpectralConfig,
) -> Result<FeatureVector, FeatureError> {
    let values = base_features(series, config)?;
    Ok(FeatureVector::from_optional(sensor, values)?)
}

fn bucket_of(lag: f64) -> usize {
    LAG_BUCKET_EDGES
        .iter()
        .rposition(|&e| lag >= e)
        .unwrap_or(0)
}

/// Mean cosine similarity between acceleration directions of every pair of
/// distinct time points, averaged within each lag bucket. Buckets without
/// pairs are `NaN`. Zero-length vectors have no direction and are skipped.
pub fn relative_direction_features(series: &TriaxialSeries) -> [f64; 5] {
    let units: Vec<Option<[f64; 3]>> = series
        .samples
        .iter()
        .map(|&[x, y, z]| {
            let n = (x * x + y * y + z * z).sqrt();
            (n > 0.0).then(|| [x / n, y / n, z / n])
        })
        .collect();
    let mut sums = [0.0f64; 5];
    let mut counts = [0usize; 5];
    for i in 0..units.len() {
        let Some(a) = units[i] else { continue };
        for j in i + 1..units.len() {
            let Some(b) = units[j] else { continue };
            let lag = (series.timestamps[j] - series.timestamps[i]).abs();
            let bucket = bucket_of(lag);
            sums[bucket] += a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
            counts[bucket] += 1;
        }
    }
    let mut out = [f64::NAN; 5];
    for b in 0..5 {
        if counts[b] > 0 {
            out[b] = (sums[b] / counts[b] as f64).clamp(-1.0, 1.0);
        }
    }
    out
}

/// The 46 watch-accelerometer features: base 26, per-axis band log energies
/// (x bands, y bands, z bands), then 5 relative-direction features.
pub fn extract_watch_features(
    series: &TriaxialSeries,
    config: &SpectralConfig,
) -> Result<FeatureVector, FeatureError> {
    let mut values = base_features(series, config)?;
    for axis in 0..3 {
        values.extend(band_log_energies(&series.axis(axis), series.nominal_rate, config));
    }
    values.extend(relative_direction_features(series));
    Ok(FeatureVector::from_optional(Sensor::WAcc, values)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor::Unit;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_series(n: usize, seed: u64, unit: Unit, rate: f64) -> TriaxialSeries {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples = (0..n)
            .map(|_| [rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5, rng.random::<f64>() + 0.5])
            .collect();
        TriaxialSeries::uniform(samples, unit, rate)
    }

    #[test]
    fn identical_axes_correlate_perfectly() {
        let samples = (0..50).map(|t| [t as f64, t as f64, (t % 3) as f64]).collect();
        let s = TriaxialSeries::uniform(samples, Unit::G, 40.0);
        let a = axis_statistics(&s).unwrap();
        assert!((a[6] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn independent_axes_are_nearly_uncorrelated() {
        let s = random_series(10_000, 7, Unit::G, 40.0);
        let a = axis_statistics(&s).unwrap();
        for c in &a[6..9] {
            assert!(c.abs() < 0.05, "{c}");
        }
    }

    #[test]
    fn constant_axis_correlation_is_zero() {
        let samples = (0..50).map(|t| [t as f64, (t * t) as f64, 1.0]).collect();
        let s = TriaxialSeries::uniform(samples, Unit::G, 40.0);
        let a = axis_statistics(&s).unwrap();
        assert_eq!(a[7], 0.0);
        assert_eq!(a[8], 0.0);
    }

    #[test]
    fn motion_features_compose_sub_features() {
        let s = random_series(800, 11, Unit::G, 40.0);
        let cfg = SpectralConfig::default();
        let fv = extract_motion_features(Sensor::Acc, &s, &cfg).unwrap();
        assert_eq!(fv.len(), 26);
        let mag = magnitude_series(&s.samples).unwrap();
        let mut expected = scalar_series_features(&mag, 40.0, &cfg).unwrap();
        expected.extend(axis_statistics(&s).unwrap());
        assert_eq!(fv.values(), expected.as_slice());
    }

    #[test]
    fn constant_unit_vector_motion_features() {
        let s = TriaxialSeries::uniform(vec![[0.0, 0.0, 1.0]; 800], Unit::G, 40.0);
        let fv = extract_motion_features(Sensor::Acc, &s, &SpectralConfig::default()).unwrap();
        assert_eq!(fv.values()[0], 1.0);
        assert_eq!(fv.values()[1], 0.0);
    }

    #[test]
    fn constant_direction_relative_features_are_one() {
        let s = TriaxialSeries::uniform(vec![[0.0, 0.0, 1.0]; 500], Unit::MilliG, 25.0);
        let fv = extract_watch_features(&s, &SpectralConfig::default()).unwrap();
        assert_eq!(fv.len(), 46);
        for v in &fv.values()[41..46] {
            assert!((v - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn alternating_direction_matches_pair_enumeration() {
        let samples: Vec<[f64; 3]> = (0..100)
            .map(|t| if t % 2 == 0 { [1.0, 0.0, 0.0] } else { [-1.0, 0.0, 0.0] })
            .collect();
        let s = TriaxialSeries::uniform(samples, Unit::MilliG, 25.0);
        // brute force over all ordered time-point pairs
        let mut sum = 0.0;
        let mut count = 0;
        for i in 0..100 {
            for j in 0..100 {
                if i == j {
                    continue;
                }
                let lag = (s.timestamps[j] - s.timestamps[i]).abs();
                if lag < 0.5 {
                    sum += s.samples[i][0] * s.samples[j][0];
                    count += 1;
                }
            }
        }
        let rd = relative_direction_features(&s);
        assert!((rd[0] - sum / count as f64).abs() < 1e-12);
    }

    #[test]
    fn short_watch_series_masks_long_lag_buckets() {
        let s = random_series(10, 3, Unit::MilliG, 25.0);
        let fv = extract_watch_features(&s, &SpectralConfig::default()).unwrap();
        let mask = fv.missing_mask();
        assert!(!mask[41]);
        assert!(mask[42] && mask[43] && mask[44] && mask[45]);
    }

    #[test]
    fn correlations_and_directions_are_scale_invariant() {
        let s = random_series(300, 5, Unit::MilliG, 25.0);
        let scaled = TriaxialSeries::uniform(
            s.samples.iter().map(|v| [v[0] * 3.5, v[1] * 3.5, v[2] * 3.5]).collect(),
            Unit::MilliG,
            25.0,
        );
        let a = axis_statistics(&s).unwrap();
        let b = axis_statistics(&scaled).unwrap();
        for k in 6..9 {
            assert!((a[k] - b[k]).abs() < 1e-12);
        }
        let ra = relative_direction_features(&s);
        let rb = relative_direction_features(&scaled);
        for k in 0..5 {
            assert!((ra[k] - rb[k]).abs() < 1e-12);
        }
    }
}
