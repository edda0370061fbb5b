//! Seeded synthetic data for tests and demos.
//!
//! Raw sessions exercise feature extraction; the feature-level generators
//! skip extraction and produce datasets with a known signal layout.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::sensor::{
    AppState, AudioMfccSeries, BatteryPlugged, BatteryState, Dataset, Example, FeatureVector, LabelValue,
    LocationSeries, LocationUpdate, PhoneStateSnapshot, Platform, RingerMode, SensorData, TriaxialSeries, Unit,
    WifiStatus, MFCC_COEFFICIENTS,
};
use crate::Sensor;

/// Label used by the feature-level generators.
pub const TARGET: &str = "TARGET";

fn pick<T: Copy, R: Rng>(rng: &mut R, xs: &[T]) -> Option<T> {
    // one extra slot for "missing"
    let i = rng.random_range(0..=xs.len());
    xs.get(i).copied()
}

fn triaxial<R: Rng>(rng: &mut R, unit: Unit, rate: f64, scale: f64) -> TriaxialSeries {
    let n = rng.random_range(16..=(rate as usize * 20));
    let freq = rng.random_range(0.2..4.0);
    let noise = Normal::new(0.0, 0.1 * scale).expect("valid normal");
    let samples = (0..n)
        .map(|i| {
            let t = i as f64 / rate;
            let s = (std::f64::consts::TAU * freq * t).sin() * scale;
            [s + noise.sample(rng), 0.5 * s + noise.sample(rng), scale + noise.sample(rng)]
        })
        .collect();
    TriaxialSeries::uniform(samples, unit, rate)
}

/// A random valid raw session with all six sensors present. Lengths, rates of
/// change, fix accuracies and phone state vary per call.
pub fn random_session<R: Rng>(rng: &mut R) -> SensorData {
    let (lat0, lon0) = (rng.random_range(-60.0..60.0), rng.random_range(-180.0..180.0));
    let n_loc = rng.random_range(1..=20);
    let mut t = 0.0;
    let updates = (0..n_loc)
        .map(|_| {
            t += rng.random_range(0.5..3.0);
            LocationUpdate {
                relative_time: t,
                latitude: Some(lat0 + rng.random_range(-1e-3..1e-3)),
                longitude: Some(lon0 + rng.random_range(-1e-3..1e-3)),
                altitude: rng.random_bool(0.8).then(|| rng.random_range(0.0..500.0)),
                speed: rng.random_bool(0.8).then(|| rng.random_range(0.0..30.0)),
                vertical_accuracy: rng.random_bool(0.8).then(|| rng.random_range(1.0..100.0)),
                horizontal_accuracy: rng.random_bool(0.9).then(|| rng.random_range(1.0..200.0)),
            }
        })
        .collect();
    let n_frames = rng.random_range(1..=400);
    let frames = (0..n_frames)
        .map(|_| (0..MFCC_COEFFICIENTS).map(|_| rng.random_range(-50.0..50.0)).collect())
        .collect();
    SensorData {
        acc: Some(triaxial(rng, Unit::G, 40.0, 1.0)),
        gyro: Some(triaxial(rng, Unit::RadPerSec, 40.0, 0.5)),
        watch_acc: Some(triaxial(rng, Unit::MilliG, 25.0, 1000.0)),
        location: Some(LocationSeries {
            updates,
            quick_features: rng
                .random_bool(0.5)
                .then(|| std::array::from_fn(|_| rng.random_range(0.0..1e-3))),
        }),
        audio: Some(AudioMfccSeries {
            frames,
            normalization_factor: rng.random_range(0.01..1.0),
        }),
        phone_state: Some(PhoneStateSnapshot {
            app_state: pick(rng, &[AppState::Active, AppState::Inactive, AppState::Background]),
            battery_plugged: pick(rng, &[BatteryPlugged::Ac, BatteryPlugged::Usb, BatteryPlugged::Wireless]),
            battery_state: pick(
                rng,
                &[
                    BatteryState::Unknown,
                    BatteryState::Unplugged,
                    BatteryState::NotCharging,
                    BatteryState::Discharging,
                    BatteryState::Charging,
                    BatteryState::Full,
                ],
            ),
            in_phone_call: pick(rng, &[false, true]),
            ringer_mode: pick(
                rng,
                &[RingerMode::Normal, RingerMode::SilentNoVibrate, RingerMode::SilentWithVibrate],
            ),
            wifi_status: pick(rng, &[WifiStatus::NotReachable, WifiStatus::ViaWifi, WifiStatus::ViaWwan]),
            hour_of_day: rng.random_range(0..24),
        }),
    }
}

fn noise_vector<R: Rng>(rng: &mut R, sensor: Sensor) -> Vec<f64> {
    let n = Normal::new(0.0, 1.0).expect("valid normal");
    (0..sensor.dim()).map(|_| n.sample(rng)).collect()
}

fn full_example(user: &str, t: i64, features: BTreeMap<Sensor, Vec<f64>>, y: bool) -> Example {
    let mut ex = Example::new(user, t).with_label(TARGET, LabelValue::from_bool(y));
    for (s, v) in features {
        ex.features.insert(s, FeatureVector::from_optional(s, v).expect("dimension matches sensor"));
    }
    ex
}

fn user_name(u: usize) -> String {
    format!("user{u:02}")
}

fn platforms(users: usize) -> BTreeMap<String, Platform> {
    (0..users)
        .map(|u| {
            let p = if u % 2 == 0 { Platform::IPhone } else { Platform::Android };
            (user_name(u), p)
        })
        .collect()
}

/// Layout of the complementary-sensor dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplementaryConfig {
    pub users: usize,
    pub per_user: usize,
    /// The two sensors that carry signal; every other sensor is pure noise.
    pub informative: [Sensor; 2],
    /// Number of leading features of an informative sensor that carry signal.
    pub signal_features: usize,
    /// Class separation, in noise standard deviations, on the signal features.
    pub shift: f64,
    pub prevalence: f64,
    pub seed: u64,
}

impl Default for ComplementaryConfig {
    fn default() -> Self {
        Self {
            users: 10,
            per_user: 500,
            informative: [Sensor::Acc, Sensor::Aud],
            signal_features: 3,
            shift: 2.5,
            prevalence: 0.3,
            seed: 17,
        }
    }
}

/// Every example carries all six sensors with unit Gaussian features. Each
/// example belongs to one of two halves at random; in the first half the
/// label shifts the first informative sensor, in the second half the other
/// one. No single sensor sees the signal on more than half of the data.
pub fn complementary_dataset(config: &ComplementaryConfig) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut examples = Vec::with_capacity(config.users * config.per_user);
    for u in 0..config.users {
        let user = user_name(u);
        for i in 0..config.per_user {
            let y = rng.random_bool(config.prevalence);
            let carrier = config.informative[usize::from(rng.random_bool(0.5))];
            let sign = if y { 1.0 } else { -1.0 };
            let features = Sensor::ALL
                .into_iter()
                .map(|s| {
                    let mut v = noise_vector(&mut rng, s);
                    if s == carrier {
                        for x in v.iter_mut().take(config.signal_features) {
                            *x += sign * config.shift / 2.0;
                        }
                    }
                    (s, v)
                })
                .collect();
            examples.push(full_example(&user, 60 * i as i64, features, y));
        }
    }
    Dataset::new(examples, vec![TARGET.to_string()]).with_platforms(platforms(config.users))
}

/// Every sensor separates the classes with a wide margin on its first feature.
pub fn separable_dataset(users: usize, per_user: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let jitter = Normal::new(0.0, 0.2).expect("valid normal");
    let mut examples = Vec::with_capacity(users * per_user);
    for u in 0..users {
        let user = user_name(u);
        for i in 0..per_user {
            let y = i % 3 == 0;
            let features = Sensor::ALL
                .into_iter()
                .map(|s| {
                    let mut v = noise_vector(&mut rng, s);
                    v[0] = if y { 3.0 } else { -3.0 } + jitter.sample(&mut rng);
                    (s, v)
                })
                .collect();
            examples.push(full_example(&user, 60 * i as i64, features, y));
        }
    }
    Dataset::new(examples, vec![TARGET.to_string()]).with_platforms(platforms(users))
}

/// A population where the label follows the sign of feature 0 of every
/// sensor, except for `drift_user`, whose relation is reversed.
pub fn drift_dataset(users: usize, per_user: usize, drift_user: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut examples = Vec::with_capacity(users * per_user);
    for u in 0..users {
        let user = user_name(u);
        let sign = if u == drift_user { -1.0 } else { 1.0 };
        for i in 0..per_user {
            let y = rng.random_bool(0.4);
            let features = Sensor::ALL
                .into_iter()
                .map(|s| {
                    let mut v = noise_vector(&mut rng, s);
                    v[0] += sign * if y { 1.5 } else { -1.5 };
                    (s, v)
                })
                .collect();
            examples.push(full_example(&user, 60 * i as i64, features, y));
        }
    }
    Dataset::new(examples, vec![TARGET.to_string()]).with_platforms(platforms(users))
}

/// User id used by the generators for user index `u`.
pub fn synthetic_user(u: usize) -> String {
    user_name(u)
}

/// `classes.len()` mutually exclusive labels; class `k` shifts feature `k` of
/// every sensor. Returns the examples in generation order.
pub fn multiclass_examples(classes: &[&str], n: usize, shift: f64, seed: u64) -> Vec<Example> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let k = rng.random_range(0..classes.len());
            let mut ex = Example::new("multi", 60 * i as i64);
            for s in Sensor::ALL {
                let mut v = noise_vector(&mut rng, s);
                v[k] += shift;
                ex.features.insert(s, FeatureVector::from_optional(s, v).expect("dimension matches sensor"));
            }
            for (j, c) in classes.iter().enumerate() {
                ex.set_label(c, LabelValue::from_bool(j == k));
            }
            ex
        })
        .collect()
}
