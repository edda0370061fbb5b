//! One-hot phone-state features and time-of-day bins.

use crate::sensor::{
    AppState, BatteryPlugged, BatteryState, FeatureVector, PhoneStateSnapshot, RingerMode, Sensor,
    WifiStatus,
};

/// Start hours of the eight half-overlapping six-hour bins; the last wraps midnight.
pub const TIME_BIN_STARTS: [u8; 8] = [0, 3, 6, 9, 12, 15, 18, 21];

/// Eight time-of-day indicators; each bin covers `[start, start + 6)` modulo 24.
pub fn time_bins(hour: u8) -> [bool; 8] {
    let h = hour % 24;
    TIME_BIN_STARTS.map(|start| (h + 24 - start) % 24 < 6)
}

fn one_hot<T: PartialEq + Copy>(value: Option<T>, options: &[T], out: &mut Vec<f64>) {
    for opt in options {
        out.push(if value == Some(*opt) { 1.0 } else { 0.0 });
    }
    out.push(if value.is_none() { 1.0 } else { 0.0 });
}

/// 26 one-hot indicators (each property's values followed by its missing
/// indicator) then 8 time-of-day bins.
///
/// Group order: app state, battery plugged, battery state, in phone call,
/// ringer mode, wifi status.
pub fn extract_phone_state_features(ps: &PhoneStateSnapshot) -> FeatureVector {
    let mut v = Vec::with_capacity(34);
    one_hot(
        ps.app_state,
        &[AppState::Active, AppState::Inactive, AppState::Background],
        &mut v,
    );
    one_hot(
        ps.battery_plugged,
        &[BatteryPlugged::Ac, BatteryPlugged::Usb, BatteryPlugged::Wireless],
        &mut v,
    );
    one_hot(
        ps.battery_state,
        &[
            BatteryState::Unknown,
            BatteryState::Unplugged,
            BatteryState::NotCharging,
            BatteryState::Discharging,
            BatteryState::Charging,
            BatteryState::Full,
        ],
        &mut v,
    );
    one_hot(ps.in_phone_call, &[false, true], &mut v);
    one_hot(
        ps.ringer_mode,
        &[
            RingerMode::Normal,
            RingerMode::SilentNoVibrate,
            RingerMode::SilentWithVibrate,
        ],
        &mut v,
    );
    one_hot(
        ps.wifi_status,
        &[WifiStatus::NotReachable, WifiStatus::ViaWifi, WifiStatus::ViaWwan],
        &mut v,
    );
    v.extend(time_bins(ps.hour_of_day).map(|b| if b { 1.0 } else { 0.0 }));
    FeatureVector::from_optional(Sensor::Ps, v).expect("phone-state features have fixed width")
}

/// Sizes of the one-hot groups, missing indicator included.
pub const ONE_HOT_GROUPS: [usize; 6] = [4, 4, 7, 3, 4, 4];
