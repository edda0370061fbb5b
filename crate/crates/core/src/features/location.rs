//! Location features: the six phone-side quick features followed by eleven
//! features derived from the transmitted updates. Only relative quantities are
//! used, never absolute coordinates.

use crate::geo::haversine_distance;
use crate::sensor::{FeatureVector, LocationSeries, LocationUpdate, Sensor};
use crate::stats;

/// Added to coordinate ranges (degrees) and the diameter (meters) before taking logs.
pub const LOG_RANGE_EPSILON: f64 = 1e-6;

/// Quick features from raw updates: std-lat, std-lon, Δlat, Δlon, and the
/// mean absolute per-second derivatives. Uncomputable entries are `NaN`.
pub fn quick_features_from_updates(updates: &[LocationUpdate]) -> [f64; 6] {
    let coords: Vec<(f64, f64, f64)> = updates
        .iter()
        .filter_map(|u| Some((u.relative_time, u.latitude?, u.longitude?)))
        .collect();
    if coords.is_empty() {
        return [f64::NAN; 6];
    }
    let lats: Vec<f64> = coords.iter().map(|c| c.1).collect();
    let lons: Vec<f64> = coords.iter().map(|c| c.2).collect();
    let first = coords[0];
    let last = coords[coords.len() - 1];
    let mut dlat = Vec::new();
    let mut dlon = Vec::new();
    for w in coords.windows(2) {
        let dt = w[1].0 - w[0].0;
        if dt > 0.0 {
            dlat.push(((w[1].1 - w[0].1) / dt).abs());
            dlon.push(((w[1].2 - w[0].2) / dt).abs());
        }
    }
    let mean_or_nan = |v: &[f64]| if v.is_empty() { f64::NAN } else { stats::mean(v) };
    [
        stats::pop_std(&lats),
        stats::pop_std(&lons),
        last.1 - first.1,
        last.2 - first.2,
        mean_or_nan(&dlat),
        mean_or_nan(&dlon),
    ]
}

fn min_max(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, v| match acc {
        None => Some((v, v)),
        Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
    })
}

/// The 17 location features. Entries that cannot be computed from the
/// available values are masked.
///
/// Order: 6 quick features, number of updates, log latitude range, log
/// longitude range, min/max altitude, min/max speed, best vertical accuracy,
/// best horizontal accuracy, diameter (m), log diameter.
pub fn extract_location_features(series: &LocationSeries) -> FeatureVector {
    let u = &series.updates;
    let mut values = Vec::with_capacity(17);
    match series.quick_features {
        Some(q) => values.extend(q),
        None => values.extend(quick_features_from_updates(u)),
    }
    values.push(u.len() as f64);
    let log_range = |mm: Option<(f64, f64)>| {
        mm.map_or(f64::NAN, |(lo, hi)| (hi - lo + LOG_RANGE_EPSILON).ln())
    };
    values.push(log_range(min_max(u.iter().filter_map(|x| x.latitude))));
    values.push(log_range(min_max(u.iter().filter_map(|x| x.longitude))));
    for mm in [
        min_max(u.iter().filter_map(|x| x.altitude)),
        min_max(u.iter().filter_map(|x| x.speed)),
    ] {
        let (lo, hi) = mm.unwrap_or((f64::NAN, f64::NAN));
        values.push(lo);
        values.push(hi);
    }
    let best = |mm: Option<(f64, f64)>| mm.map_or(f64::NAN, |(lo, _)| lo);
    values.push(best(min_max(u.iter().filter_map(|x| x.vertical_accuracy))));
    values.push(best(min_max(u.iter().filter_map(|x| x.horizontal_accuracy))));
    let points: Vec<(f64, f64)> = u
        .iter()
        .filter_map(|x| Some((x.latitude?, x.longitude?)))
        .collect();
    let diameter = if points.is_empty() {
        f64::NAN
    } else {
        let mut d = 0.0f64;
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                d = d.max(haversine_distance(points[i].0, points[i].1, points[j].0, points[j].1));
            }
        }
        d
    };
    values.push(diameter);
    values.push((diameter + LOG_RANGE_EPSILON).ln());
    FeatureVector::from_optional(Sensor::Loc, values).expect("location features have fixed width")
}
