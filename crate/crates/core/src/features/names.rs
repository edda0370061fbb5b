//! Feature column names, following the public dataset's `group:subgroup:name` scheme.

use crate::sensor::Sensor;

fn scalar_and_axis(prefix: &str, out: &mut Vec<String>) {
    for s in [
        "mean",
        "std",
        "moment3",
        "moment4",
        "percentile25",
        "percentile50",
        "percentile75",
        "value_entropy",
        "time_entropy",
    ] {
        out.push(format!("{prefix}:magnitude_stats:{s}"));
    }
    for b in 0..5 {
        out.push(format!("{prefix}:magnitude_spectrum:log_energy_band{b}"));
    }
    out.push(format!("{prefix}:magnitude_spectrum:spectral_entropy"));
    out.push(format!("{prefix}:magnitude_autocorrelation:period"));
    out.push(format!("{prefix}:magnitude_autocorrelation:normalized_ac"));
    for s in [
        "mean_x", "mean_y", "mean_z", "std_x", "std_y", "std_z", "ro_xy", "ro_xz", "ro_yz",
    ] {
        out.push(format!("{prefix}:3d:{s}"));
    }
}

/// Column-name prefix groups per sensor, in the order their columns appear
/// inside the sensor's feature vector.
pub fn column_prefixes(sensor: Sensor) -> &'static [&'static str] {
    match sensor {
        Sensor::Acc => &["raw_acc:"],
        Sensor::Gyro => &["proc_gyro:"],
        Sensor::WAcc => &["watch_acceleration:"],
        Sensor::Loc => &["location_quick_features:", "location:"],
        Sensor::Aud => &["audio_naive:"],
        Sensor::Ps => &["discrete:"],
    }
}

/// Column prefixes of known non-core sensor groups; ignored without a warning.
pub const NON_CORE_PREFIXES: &[&str] = &[
    "raw_magnet:",
    "watch_heading:",
    "audio_properties:",
    "lf_measurements:",
];

/// Canonical column names of a sensor's feature vector, in vector order.
pub fn feature_names(sensor: Sensor) -> Vec<String> {
    let mut out = Vec::with_capacity(sensor.dim());
    match sensor {
        Sensor::Acc => scalar_and_axis("raw_acc", &mut out),
        Sensor::Gyro => scalar_and_axis("proc_gyro", &mut out),
        Sensor::WAcc => {
            scalar_and_axis("watch_acceleration", &mut out);
            for axis in ["x", "y", "z"] {
                for b in 0..5 {
                    out.push(format!("watch_acceleration:spectrum:{axis}_log_energy_band{b}"));
                }
            }
            for r in 0..5 {
                out.push(format!(
                    "watch_acceleration:relative_directions:avr_cosine_similarity_lag_range{r}"
                ));
            }
        }
        Sensor::Loc => {
            for s in [
                "std_lat",
                "std_long",
                "lat_change",
                "long_change",
                "mean_abs_lat_deriv",
                "mean_abs_long_deriv",
            ] {
                out.push(format!("location_quick_features:{s}"));
            }
            for s in [
                "num_valid_updates",
                "log_latitude_range",
                "log_longitude_range",
                "min_altitude",
                "max_altitude",
                "min_speed",
                "max_speed",
                "best_vertical_accuracy",
                "best_horizontal_accuracy",
                "diameter",
                "log_diameter",
            ] {
                out.push(format!("location:{s}"));
            }
        }
        Sensor::Aud => {
            for stat in ["mean", "std"] {
                for c in 0..13 {
                    out.push(format!("audio_naive:mfcc{c}:{stat}"));
                }
            }
        }
        Sensor::Ps => {
            let groups: [(&str, &[&str]); 6] = [
                ("app_state", &["is_active", "is_inactive", "is_background"]),
                ("battery_plugged", &["is_ac", "is_usb", "is_wireless"]),
                (
                    "battery_state",
                    &[
                        "is_unknown",
                        "is_unplugged",
                        "is_not_charging",
                        "is_discharging",
                        "is_charging",
                        "is_full",
                    ],
                ),
                ("on_the_phone", &["is_False", "is_True"]),
                (
                    "ringer_mode",
                    &["is_normal", "is_silent_no_vibrate", "is_silent_with_vibrate"],
                ),
                (
                    "wifi_status",
                    &["is_not_reachable", "is_reachable_via_wifi", "is_reachable_via_wwan"],
                ),
            ];
            for (group, values) in groups {
                for v in values {
                    out.push(format!("discrete:{group}:{v}"));
                }
                out.push(format!("discrete:{group}:missing"));
            }
            for (a, b) in [(0, 6), (3, 9), (6, 12), (9, 15), (12, 18), (15, 21), (18, 24), (21, 3)] {
                out.push(format!("discrete:time_of_day:between{a}and{b}"));
            }
        }
    }
    debug_assert_eq!(out.len(), sensor.dim());
    out
}

/// All 175 feature names in early-fusion order.
pub fn all_feature_names() -> Vec<String> {
    Sensor::ALL.iter().flat_map(|&s| feature_names(s)).collect()
}
