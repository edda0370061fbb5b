//! Raw session bundles: one directory per recorded minute.
//!
//! ```text
//! session.json     metadata, labels, phone state
//! acc.csv          t,x,y,z   phone accelerometer
//! gyro.csv         t,x,y,z   phone gyroscope
//! watch_acc.csv    t,x,y,z   watch accelerometer
//! location.csv     t,latitude,longitude,altitude,speed,vertical_accuracy,horizontal_accuracy
//! mfcc.csv         13 columns, one row per frame
//! audio_raw.csv    one sample per row, used only when mfcc.csv is absent
//! ```
//!
//! A missing file means the sensor was not recorded. Times are seconds from
//! the session start and must be strictly increasing. Motion samples are
//! converted to g (phone), rad/s and milli-g (watch).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::IngestError;
use crate::features::{compute_mfcc, extract_features, SpectralConfig};
use crate::labels::canonical_label;
use crate::sensor::{
    AppState, AudioMfccSeries, BatteryPlugged, BatteryState, Example, LabelValue, LocationSeries, LocationUpdate,
    PhoneStateSnapshot, Platform, RingerMode, SensorData, TriaxialSeries, Unit, WifiStatus, MFCC_COEFFICIENTS,
};

pub const SESSION_FILE: &str = "session.json";
pub const SESSION_FORMAT_VERSION: u32 = 1;
pub const PHONE_RATE_HZ: f64 = 40.0;
pub const WATCH_RATE_HZ: f64 = 25.0;
const STANDARD_GRAVITY: f64 = 9.80665;

/// Phone state fields as stored in `session.json`; the hour is derived from
/// the session time.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhoneStateFields {
    #[serde(default)]
    pub app_state: Option<AppState>,
    #[serde(default)]
    pub battery_plugged: Option<BatteryPlugged>,
    #[serde(default)]
    pub battery_state: Option<BatteryState>,
    #[serde(default)]
    pub in_phone_call: Option<bool>,
    #[serde(default)]
    pub ringer_mode: Option<RingerMode>,
    #[serde(default)]
    pub wifi_status: Option<WifiStatus>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SessionMeta {
    pub format_version: u32,
    pub user_id: String,
    /// Unix seconds of the session start.
    pub timestamp: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utc_offset_hours: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub platform: Option<String>,
    /// `g` or `m/s^2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acc_unit: Option<String>,
    /// `rad/s` or `deg/s`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gyro_unit: Option<String>,
    /// `mg`, `g` or `m/s^2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub watch_unit: Option<String>,
    /// Label name to value; `null` is missing.
    #[serde(default)]
    pub labels: BTreeMap<String, Option<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phone_state: Option<PhoneStateFields>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location_quick_features: Option<[f64; 6]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub audio_normalization_factor: Option<f64>,
}

impl SessionMeta {
    pub fn new(user_id: impl Into<String>, timestamp: i64) -> Self {
        Self {
            format_version: SESSION_FORMAT_VERSION,
            user_id: user_id.into(),
            timestamp,
            utc_offset_hours: None,
            platform: None,
            acc_unit: None,
            gyro_unit: None,
            watch_unit: None,
            labels: BTreeMap::new(),
            phone_state: None,
            location_quick_features: None,
            audio_normalization_factor: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionBundle {
    pub path: PathBuf,
    pub meta: SessionMeta,
    pub platform: Option<Platform>,
    pub sensor_data: SensorData,
}

/// Local hour of a unix time shifted by a UTC offset in hours.
pub fn local_hour(timestamp: i64, utc_offset_hours: f64) -> u8 {
    let local = timestamp as f64 + utc_offset_hours * 3600.0;
    (local.rem_euclid(86_400.0) / 3600.0).floor() as u8 % 24
}

fn session_err(path: &Path, message: impl Into<String>) -> IngestError {
    IngestError::Session {
        path: path.to_path_buf(),
        message: message.into(),
    }
}

/// Rows of a numeric CSV with a header line. Empty and `nan` cells are `None`.
fn read_rows(path: &Path, width: usize) -> Result<Vec<(usize, Vec<Option<f64>>)>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| IngestError::io(path, e))?;
    let header_len = rdr.headers().map_err(IngestError::from_csv)?.len();
    if header_len != width {
        return Err(session_err(path, format!("expected {width} columns, found {header_len}")));
    }
    let file = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| IngestError::from_csv(e).in_file(path))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != width {
            return Err(IngestError::Ragged { line, expected: width, got: rec.len() }.in_file(path));
        }
        let mut row = Vec::with_capacity(width);
        for (j, cell) in rec.iter().enumerate() {
            let t = cell.trim();
            if t.is_empty() || t.eq_ignore_ascii_case("nan") {
                row.push(None);
            } else {
                let v = t.parse::<f64>().map_err(|_| {
                    IngestError::InvalidCell {
                        line,
                        column: format!("{file}:{j}"),
                        value: cell.to_string(),
                    }
                    .in_file(path)
                })?;
                row.push(Some(v));
            }
        }
        rows.push((line, row));
    }
    Ok(rows)
}

fn check_increasing(path: &Path, times: &[(usize, f64)]) -> Result<(), IngestError> {
    for w in times.windows(2) {
        if w[1].1 <= w[0].1 {
            return Err(IngestError::NonMonotone {
                file: path.display().to_string(),
                line: w[1].0,
            });
        }
    }
    Ok(())
}

fn motion_scale(path: &Path, unit: Option<&str>, target: Unit) -> Result<f64, IngestError> {
    let scale = match (target, unit.unwrap_or("")) {
        (Unit::G, "" | "g") => 1.0,
        (Unit::G, "m/s^2") => 1.0 / STANDARD_GRAVITY,
        (Unit::RadPerSec, "" | "rad/s") => 1.0,
        (Unit::RadPerSec, "deg/s") => std::f64::consts::PI / 180.0,
        (Unit::MilliG, "" | "mg") => 1.0,
        (Unit::MilliG, "g") => 1000.0,
        (Unit::MilliG, "m/s^2") => 1000.0 / STANDARD_GRAVITY,
        (_, other) => return Err(session_err(path, format!("unsupported unit `{other}`"))),
    };
    Ok(scale)
}

fn read_triaxial(path: &Path, unit: Unit, scale: f64, rate: f64) -> Result<Option<TriaxialSeries>, IngestError> {
    if !path.exists() {
        return Ok(None);
    }
    let rows = read_rows(path, 4)?;
    let mut times = Vec::with_capacity(rows.len());
    let mut samples = Vec::with_capacity(rows.len());
    for (line, row) in rows {
        let vals: Option<Vec<f64>> = row.into_iter().collect();
        let vals = vals.ok_or_else(|| session_err(path, format!("line {line}: motion samples cannot be empty")))?;
        times.push((line, vals[0]));
        samples.push([vals[1] * scale, vals[2] * scale, vals[3] * scale]);
    }
    check_increasing(path, &times)?;
    Ok(Some(TriaxialSeries::new(times.into_iter().map(|t| t.1).collect(), samples, unit, rate)))
}

fn read_location(path: &Path, quick: Option<[f64; 6]>) -> Result<Option<LocationSeries>, IngestError> {
    if !path.exists() {
        return Ok(quick.map(|q| LocationSeries {
            updates: Vec::new(),
            quick_features: Some(q),
        }));
    }
    let rows = read_rows(path, 7)?;
    let mut times = Vec::with_capacity(rows.len());
    let mut updates = Vec::with_capacity(rows.len());
    for (line, r) in rows {
        let t = r[0].ok_or_else(|| session_err(path, format!("line {line}: missing time")))?;
        times.push((line, t));
        updates.push(LocationUpdate {
            relative_time: t,
            latitude: r[1],
            longitude: r[2],
            altitude: r[3],
            speed: r[4],
            vertical_accuracy: r[5],
            horizontal_accuracy: r[6],
        });
    }
    check_increasing(path, &times)?;
    Ok(Some(LocationSeries {
        updates,
        quick_features: quick,
    }))
}

fn read_audio(dir: &Path, factor: Option<f64>) -> Result<Option<AudioMfccSeries>, IngestError> {
    let mfcc = dir.join("mfcc.csv");
    if mfcc.exists() {
        let rows = read_rows(&mfcc, MFCC_COEFFICIENTS)?;
        let mut frames = Vec::with_capacity(rows.len());
        for (line, r) in rows {
            let f: Option<Vec<f64>> = r.into_iter().collect();
            frames.push(f.ok_or_else(|| session_err(&mfcc, format!("line {line}: empty coefficient")))?);
        }
        let normalization_factor =
            factor.ok_or_else(|| session_err(dir, "mfcc.csv requires audio_normalization_factor"))?;
        return Ok(Some(AudioMfccSeries {
            frames,
            normalization_factor,
        }));
    }
    let raw = dir.join("audio_raw.csv");
    if raw.exists() {
        let rows = read_rows(&raw, 1)?;
        let samples: Vec<f64> = rows.into_iter().map(|(_, r)| r[0].unwrap_or(0.0)).collect();
        return Ok(Some(compute_mfcc(&samples).map_err(|e| IngestError::Feature(e).in_file(&raw))?));
    }
    Ok(None)
}

/// Reads one bundle directory. `default_utc_offset` applies when the session
/// has no offset of its own; an offset is required when phone state is present.
pub fn read_session_bundle(dir: &Path, default_utc_offset: Option<f64>) -> Result<SessionBundle, IngestError> {
    let meta_path = dir.join(SESSION_FILE);
    let text = std::fs::read_to_string(&meta_path).map_err(|e| IngestError::io(&meta_path, e))?;
    let meta: SessionMeta = serde_json::from_str(&text).map_err(|e| session_err(&meta_path, e.to_string()))?;
    if meta.format_version != SESSION_FORMAT_VERSION {
        return Err(session_err(
            &meta_path,
            format!("unsupported format_version {}", meta.format_version),
        ));
    }
    let platform = match &meta.platform {
        Some(p) => Some(p.parse::<Platform>().map_err(|e| session_err(&meta_path, e.to_string()))?),
        None => None,
    };
    let acc_scale = motion_scale(&meta_path, meta.acc_unit.as_deref(), Unit::G)?;
    let gyro_scale = motion_scale(&meta_path, meta.gyro_unit.as_deref(), Unit::RadPerSec)?;
    let watch_scale = motion_scale(&meta_path, meta.watch_unit.as_deref(), Unit::MilliG)?;
    let phone_state = match meta.phone_state {
        Some(ps) => {
            let offset = meta
                .utc_offset_hours
                .or(default_utc_offset)
                .ok_or_else(|| session_err(&meta_path, "phone state needs utc_offset_hours"))?;
            Some(PhoneStateSnapshot {
                app_state: ps.app_state,
                battery_plugged: ps.battery_plugged,
                battery_state: ps.battery_state,
                in_phone_call: ps.in_phone_call,
                ringer_mode: ps.ringer_mode,
                wifi_status: ps.wifi_status,
                hour_of_day: local_hour(meta.timestamp, offset),
            })
        }
        None => None,
    };
    let sensor_data = SensorData {
        acc: read_triaxial(&dir.join("acc.csv"), Unit::G, acc_scale, PHONE_RATE_HZ)?,
        gyro: read_triaxial(&dir.join("gyro.csv"), Unit::RadPerSec, gyro_scale, PHONE_RATE_HZ)?,
        watch_acc: read_triaxial(&dir.join("watch_acc.csv"), Unit::MilliG, watch_scale, WATCH_RATE_HZ)?,
        location: read_location(&dir.join("location.csv"), meta.location_quick_features)?,
        audio: read_audio(dir, meta.audio_normalization_factor)?,
        phone_state,
    };
    Ok(SessionBundle {
        path: dir.to_path_buf(),
        meta,
        platform,
        sensor_data,
    })
}

/// Builds an example with extracted features and canonical labels.
pub fn session_to_example(bundle: SessionBundle, config: &SpectralConfig) -> Result<Example, IngestError> {
    let mut ex = Example::new(bundle.meta.user_id.clone(), bundle.meta.timestamp);
    ex.sensor_data = bundle.sensor_data;
    ex.features = extract_features(&ex, config).map_err(|e| IngestError::Feature(e).in_file(&bundle.path))?;
    for (name, v) in &bundle.meta.labels {
        let value = v.map_or(LabelValue::Missing, LabelValue::from_bool);
        ex.set_label(&canonical_label(name), value);
    }
    Ok(ex)
}

/// Directories under `root` (inclusive) that contain a `session.json`, sorted.
pub fn find_sessions(root: &Path) -> Result<Vec<PathBuf>, IngestError> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        if dir.join(SESSION_FILE).is_file() {
            out.push(dir.clone());
        }
        for entry in std::fs::read_dir(&dir).map_err(|e| IngestError::io(&dir, e))? {
            let path = entry.map_err(|e| IngestError::io(&dir, e))?.path();
            if path.is_dir() {
                stack.push(path);
            }
        }
    }
    out.sort();
    Ok(out)
}

fn write_csv(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Result<(), IngestError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| IngestError::io(path, e))?;
    w.write_record(header).map_err(IngestError::from_csv)?;
    for r in rows {
        w.write_record(&r).map_err(IngestError::from_csv)?;
    }
    w.flush().map_err(|e| IngestError::io(path, e))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writes a bundle in the layout read by [`read_session_bundle`]. Motion
/// samples are written in the canonical units, MFCC frames as `mfcc.csv`.
pub fn write_session_bundle(dir: &Path, meta: &SessionMeta, data: &SensorData) -> Result<(), IngestError> {
    std::fs::create_dir_all(dir).map_err(|e| IngestError::io(dir, e))?;
    let mut meta = meta.clone();
    meta.acc_unit = None;
    meta.gyro_unit = None;
    meta.watch_unit = None;
    if let Some(ps) = &data.phone_state {
        meta.phone_state = Some(PhoneStateFields {
            app_state: ps.app_state,
            battery_plugged: ps.battery_plugged,
            battery_state: ps.battery_state,
            in_phone_call: ps.in_phone_call,
            ringer_mode: ps.ringer_mode,
            wifi_status: ps.wifi_status,
        });
    }
    if let Some(loc) = &data.location {
        meta.location_quick_features = loc.quick_features;
    }
    if let Some(a) = &data.audio {
        meta.audio_normalization_factor = Some(a.normalization_factor);
    }
    let json = serde_json::to_string_pretty(&meta).map_err(|e| session_err(dir, e.to_string()))?;
    let meta_path = dir.join(SESSION_FILE);
    std::fs::write(&meta_path, json).map_err(|e| IngestError::io(&meta_path, e))?;
    for (name, series) in [("acc.csv", &data.acc), ("gyro.csv", &data.gyro), ("watch_acc.csv", &data.watch_acc)] {
        if let Some(s) = series {
            let rows = s
                .timestamps
                .iter()
                .zip(&s.samples)
                .map(|(t, v)| vec![t.to_string(), v[0].to_string(), v[1].to_string(), v[2].to_string()]);
            write_csv(&dir.join(name), &["t", "x", "y", "z"], rows)?;
        }
    }
    if let Some(loc) = &data.location {
        if !loc.updates.is_empty() {
            let rows = loc.updates.iter().map(|u| {
                vec![
                    u.relative_time.to_string(),
                    opt(u.latitude),
                    opt(u.longitude),
                    opt(u.altitude),
                    opt(u.speed),
                    opt(u.vertical_accuracy),
                    opt(u.horizontal_accuracy),
                ]
            });
            let header = [
                "t",
                "latitude",
                "longitude",
                "altitude",
                "speed",
                "vertical_accuracy",
                "horizontal_accuracy",
            ];
            write_csv(&dir.join("location.csv"), &header, rows)?;
        }
    }
    if let Some(a) = &data.audio {
        let header: Vec<String> = (0..MFCC_COEFFICIENTS).map(|i| format!("c{i}")).collect();
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let rows = a.frames.iter().map(|f| f.iter().map(|v| v.to_string()).collect());
        write_csv(&dir.join("mfcc.csv"), &header, rows)?;
    }
    Ok(())
}
