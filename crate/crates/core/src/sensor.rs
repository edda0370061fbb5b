//! Domain types for recordings, examples, labels and datasets.
//!
//! An [`Example`] is one labeled minute. Each of the six core sensors may carry
//! a raw payload, a precomputed [`FeatureVector`], both, or nothing. Missing
//! sensors are absent rather than zero-filled.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SensorError {
    #[error("{sensor} feature vector must have {expected} values, got {actual}")]
    Dimension {
        sensor: Sensor,
        expected: usize,
        actual: usize,
    },
    #[error("missing mask has {mask} entries but {values} values")]
    MaskLength { values: usize, mask: usize },
    #[error("unknown sensor name '{0}'")]
    UnknownSensor(String),
}

/// The six core sensors, in early-fusion concatenation order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sensor {
    Acc,
    Gyro,
    WAcc,
    Loc,
    Aud,
    Ps,
}

/// Dimension of the early-fusion concatenation of all six sensors.
pub const EARLY_FUSION_DIM: usize = 175;

impl Sensor {
    pub const ALL: [Sensor; 6] = [
        Sensor::Acc,
        Sensor::Gyro,
        Sensor::WAcc,
        Sensor::Loc,
        Sensor::Aud,
        Sensor::Ps,
    ];

    /// Fixed feature dimension of the sensor.
    pub const fn dim(self) -> usize {
        match self {
            Sensor::Acc | Sensor::Gyro | Sensor::Aud => 26,
            Sensor::WAcc => 46,
            Sensor::Loc => 17,
            Sensor::Ps => 34,
        }
    }

    pub const fn index(self) -> usize {
        match self {
            Sensor::Acc => 0,
            Sensor::Gyro => 1,
            Sensor::WAcc => 2,
            Sensor::Loc => 3,
            Sensor::Aud => 4,
            Sensor::Ps => 5,
        }
    }

    /// Lower-case short name used on the command line.
    pub const fn short_name(self) -> &'static str {
        match self {
            Sensor::Acc => "acc",
            Sensor::Gyro => "gyro",
            Sensor::WAcc => "wacc",
            Sensor::Loc => "loc",
            Sensor::Aud => "aud",
            Sensor::Ps => "ps",
        }
    }

    pub const fn display_name(self) -> &'static str {
        match self {
            Sensor::Acc => "Acc",
            Sensor::Gyro => "Gyro",
            Sensor::WAcc => "WAcc",
            Sensor::Loc => "Loc",
            Sensor::Aud => "Aud",
            Sensor::Ps => "PS",
        }
    }
}

impl fmt::Display for Sensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

impl FromStr for Sensor {
    type Err = SensorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        Sensor::ALL
            .into_iter()
            .find(|sensor| sensor.short_name() == lower)
            .ok_or_else(|| SensorError::UnknownSensor(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Unit {
    /// Standard gravity; phone accelerometer.
    G,
    /// Thousandths of standard gravity; watch accelerometer.
    MilliG,
    /// Radians per second; gyroscope.
    RadPerSec,
}

impl Unit {
    pub fn expected_for(sensor: Sensor) -> Option<Unit> {
        match sensor {
            Sensor::Acc => Some(Unit::G),
            Sensor::Gyro => Some(Unit::RadPerSec),
            Sensor::WAcc => Some(Unit::MilliG),
            _ => None,
        }
    }
}

/// A 3-axis time series recorded during one ~20 s session.
#[derive(Debug, Clone, PartialEq)]
pub struct TriaxialSeries {
    /// Seconds relative to the session start, non-decreasing.
    pub timestamps: Vec<f64>,
    pub samples: Vec<[f64; 3]>,
    pub unit: Unit,
    /// Hz; 40 for phone sensors, 25 for the watch.
    pub nominal_rate: f64,
}

impl TriaxialSeries {
    pub fn new(timestamps: Vec<f64>, samples: Vec<[f64; 3]>, unit: Unit, nominal_rate: f64) -> Self {
        Self {
            timestamps,
            samples,
            unit,
            nominal_rate,
        }
    }

    /// Builds a uniformly sampled series with timestamps `i / rate`.
    pub fn uniform(samples: Vec<[f64; 3]>, unit: Unit, rate: f64) -> Self {
        let timestamps = (0..samples.len()).map(|i| i as f64 / rate).collect();
        Self::new(timestamps, samples, unit, rate)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn axis(&self, axis: usize) -> Vec<f64> {
        self.samples.iter().map(|s| s[axis]).collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LocationUpdate {
    pub relative_time: f64,
    pub latitude: Option<f64>,
    pub longitude: Option<f64>,
    pub altitude: Option<f64>,
    pub speed: Option<f64>,
    pub vertical_accuracy: Option<f64>,
    pub horizontal_accuracy: Option<f64>,
}

/// Location updates of one session plus the six quick features computed on the phone.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LocationSeries {
    pub updates: Vec<LocationUpdate>,
    /// std-lat, std-lon, Δlat, Δlon, mean |dlat/dt|, mean |dlon/dt|.
    pub quick_features: Option<[f64; 6]>,
}

pub const MFCC_COEFFICIENTS: usize = 13;

#[derive(Debug, Clone, PartialEq)]
pub struct AudioMfccSeries {
    pub frames: Vec<Vec<f64>>,
    pub normalization_factor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AppState {
    Active,
    Inactive,
    Background,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatteryPlugged {
    Ac,
    Usb,
    Wireless,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BatteryState {
    Unknown,
    Unplugged,
    NotCharging,
    Discharging,
    Charging,
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RingerMode {
    Normal,
    SilentNoVibrate,
    SilentWithVibrate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WifiStatus {
    NotReachable,
    ViaWifi,
    ViaWwan,
}

/// Discrete phone-state properties sampled once per session. `None` means missing.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhoneStateSnapshot {
    pub app_state: Option<AppState>,
    pub battery_plugged: Option<BatteryPlugged>,
    pub battery_state: Option<BatteryState>,
    pub in_phone_call: Option<bool>,
    pub ringer_mode: Option<RingerMode>,
    pub wifi_status: Option<WifiStatus>,
    /// Local hour, 0..=23.
    pub hour_of_day: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LabelValue {
    Relevant,
    NotRelevant,
    Missing,
}

impl LabelValue {
    pub fn from_bool(b: bool) -> Self {
        if b {
            LabelValue::Relevant
        } else {
            LabelValue::NotRelevant
        }
    }

    /// `Some(true)` for relevant, `Some(false)` for not relevant.
    pub fn as_bool(self) -> Option<bool> {
        match self {
            LabelValue::Relevant => Some(true),
            LabelValue::NotRelevant => Some(false),
            LabelValue::Missing => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelAssignment {
    pub label_name: String,
    pub value: LabelValue,
}

impl LabelAssignment {
    pub fn new(label_name: impl Into<String>, value: LabelValue) -> Self {
        Self {
            label_name: label_name.into(),
            value,
        }
    }
}

/// Fixed-dimension feature vector of one sensor. Masked entries hold `NaN`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    sensor: Sensor,
    values: Vec<f64>,
    missing: Vec<bool>,
}

impl FeatureVector {
    pub fn new(sensor: Sensor, values: Vec<f64>, missing: Vec<bool>) -> Result<Self, SensorError> {
        if values.len() != sensor.dim() {
            return Err(SensorError::Dimension {
                sensor,
                expected: sensor.dim(),
                actual: values.len(),
            });
        }
        if missing.len() != values.len() {
            return Err(SensorError::MaskLength {
                values: values.len(),
                mask: missing.len(),
            });
        }
        let values = values
            .into_iter()
            .zip(&missing)
            .map(|(v, &m)| if m { f64::NAN } else { v })
            .collect();
        Ok(Self {
            sensor,
            values,
            missing,
        })
    }

    /// Builds a vector where every non-finite value is treated as masked.
    pub fn from_optional(sensor: Sensor, values: Vec<f64>) -> Result<Self, SensorError> {
        let missing = values.iter().map(|v| !v.is_finite()).collect();
        Self::new(sensor, values, missing)
    }

    pub fn fully_masked(sensor: Sensor) -> Self {
        Self {
            sensor,
            values: vec![f64::NAN; sensor.dim()],
            missing: vec![true; sensor.dim()],
        }
    }

    pub fn sensor(&self) -> Sensor {
        self.sensor
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn missing_mask(&self) -> &[bool] {
        &self.missing
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_fully_masked(&self) -> bool {
        self.missing.iter().all(|&m| m)
    }

    pub fn get(&self, i: usize) -> Option<f64> {
        if self.missing[i] {
            None
        } else {
            Some(self.values[i])
        }
    }
}

/// Raw payloads of the six core sensors.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SensorData {
    pub acc: Option<TriaxialSeries>,
    pub gyro: Option<TriaxialSeries>,
    pub watch_acc: Option<TriaxialSeries>,
    pub location: Option<LocationSeries>,
    pub audio: Option<AudioMfccSeries>,
    pub phone_state: Option<PhoneStateSnapshot>,
}

impl SensorData {
    pub fn has(&self, sensor: Sensor) -> bool {
        match sensor {
            Sensor::Acc => self.acc.is_some(),
            Sensor::Gyro => self.gyro.is_some(),
            Sensor::WAcc => self.watch_acc.is_some(),
            Sensor::Loc => self.location.is_some(),
            Sensor::Aud => self.audio.is_some(),
            Sensor::Ps => self.phone_state.is_some(),
        }
    }

    pub fn triaxial(&self, sensor: Sensor) -> Option<&TriaxialSeries> {
        match sensor {
            Sensor::Acc => self.acc.as_ref(),
            Sensor::Gyro => self.gyro.as_ref(),
            Sensor::WAcc => self.watch_acc.as_ref(),
            _ => None,
        }
    }
}

/// Identity of an example across the whole dataset.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExampleId {
    pub user_id: String,
    pub timestamp: i64,
}

/// One labeled minute.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Example {
    pub user_id: String,
    /// Unix seconds.
    pub timestamp: i64,
    pub sensor_data: SensorData,
    pub features: BTreeMap<Sensor, FeatureVector>,
    pub labels: Vec<LabelAssignment>,
    /// Extra columns carried through ingestion untouched.
    pub metadata: BTreeMap<String, String>,
}

impl Example {
    pub fn new(user_id: impl Into<String>, timestamp: i64) -> Self {
        Self {
            user_id: user_id.into(),
            timestamp,
            ..Default::default()
        }
    }

    pub fn id(&self) -> ExampleId {
        ExampleId {
            user_id: self.user_id.clone(),
            timestamp: self.timestamp,
        }
    }

    pub fn label(&self, name: &str) -> LabelValue {
        self.labels
            .iter()
            .find(|l| l.label_name == name)
            .map(|l| l.value)
            .unwrap_or(LabelValue::Missing)
    }

    pub fn set_label(&mut self, name: &str, value: LabelValue) {
        match self.labels.iter_mut().find(|l| l.label_name == name) {
            Some(l) => l.value = value,
            None => self.labels.push(LabelAssignment::new(name, value)),
        }
    }

    pub fn with_label(mut self, name: &str, value: LabelValue) -> Self {
        self.set_label(name, value);
        self
    }

    pub fn with_features(mut self, fv: FeatureVector) -> Self {
        self.features.insert(fv.sensor(), fv);
        self
    }

    /// The sensor has a raw payload or a precomputed vector with at least one unmasked value.
    pub fn has_sensor(&self, sensor: Sensor) -> bool {
        self.sensor_data.has(sensor)
            || self
                .features
                .get(&sensor)
                .is_some_and(|fv| !fv.is_fully_masked())
    }

    pub fn has_all_core_sensors(&self) -> bool {
        Sensor::ALL.iter().all(|&s| self.has_sensor(s))
    }

    pub fn feature(&self, sensor: Sensor) -> Option<&FeatureVector> {
        self.features.get(&sensor).filter(|fv| !fv.is_fully_masked())
    }
}

/// A broken structural invariant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub field: String,
    pub rule: String,
}

impl Violation {
    fn new(field: impl Into<String>, rule: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            rule: rule.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.rule)
    }
}

fn validate_triaxial(sensor: Sensor, s: &TriaxialSeries, out: &mut Vec<Violation>) {
    let field = format!("sensor_data.{}", sensor.short_name());
    if s.samples.is_empty() {
        out.push(Violation::new(&field, "series must have at least one sample"));
    }
    if s.samples.len() != s.timestamps.len() {
        out.push(Violation::new(
            format!("{field}.timestamps"),
            format!(
                "{} timestamps for {} samples",
                s.timestamps.len(),
                s.samples.len()
            ),
        ));
    }
    if s.timestamps.windows(2).any(|w| w[1] < w[0]) {
        out.push(Violation::new(
            format!("{field}.timestamps"),
            "timestamps must be non-decreasing",
        ));
    }
    if Unit::expected_for(sensor) != Some(s.unit) {
        out.push(Violation::new(
            format!("{field}.unit"),
            format!("unit {:?} does not match sensor {sensor}", s.unit),
        ));
    }
    if !(s.nominal_rate > 0.0) {
        out.push(Violation::new(format!("{field}.nominal_rate"), "rate must be positive"));
    }
}

/// Checks every structural invariant of an example. An empty list means valid.
pub fn validate_example(example: &Example) -> Vec<Violation> {
    let mut out = Vec::new();
    if example.user_id.is_empty() {
        out.push(Violation::new("user_id", "must be nonempty"));
    }
    let data = &example.sensor_data;
    for sensor in [Sensor::Acc, Sensor::Gyro, Sensor::WAcc] {
        if let Some(s) = data.triaxial(sensor) {
            validate_triaxial(sensor, s, &mut out);
        }
    }
    if let Some(loc) = &data.location {
        for (i, u) in loc.updates.iter().enumerate() {
            for (name, acc) in [
                ("vertical_accuracy", u.vertical_accuracy),
                ("horizontal_accuracy", u.horizontal_accuracy),
            ] {
                if acc.is_some_and(|a| a < 0.0) {
                    out.push(Violation::new(
                        format!("sensor_data.loc.updates[{i}].{name}"),
                        "accuracy must be >= 0",
                    ));
                }
            }
            if u.latitude.is_some_and(|v| v.abs() > 90.0) {
                out.push(Violation::new(
                    format!("sensor_data.loc.updates[{i}].latitude"),
                    "latitude must lie in [-90, 90]",
                ));
            }
            if u.longitude.is_some_and(|v| v.abs() > 180.0) {
                out.push(Violation::new(
                    format!("sensor_data.loc.updates[{i}].longitude"),
                    "longitude must lie in [-180, 180]",
                ));
            }
        }
    }
    if let Some(aud) = &data.audio {
        if aud.frames.is_empty() {
            out.push(Violation::new("sensor_data.aud.frames", "at least one frame required"));
        }
        for (i, f) in aud.frames.iter().enumerate() {
            if f.len() != MFCC_COEFFICIENTS {
                out.push(Violation::new(
                    format!("sensor_data.aud.frames[{i}]"),
                    format!("frame width must be {MFCC_COEFFICIENTS}, got {}", f.len()),
                ));
            }
        }
        if !(aud.normalization_factor > 0.0) {
            out.push(Violation::new(
                "sensor_data.aud.normalization_factor",
                "must be positive",
            ));
        }
    }
    if let Some(ps) = &data.phone_state {
        if ps.hour_of_day > 23 {
            out.push(Violation::new(
                "sensor_data.ps.hour_of_day",
                format!("hour must lie in [0, 23], got {}", ps.hour_of_day),
            ));
        }
    }
    for (&sensor, fv) in &example.features {
        if fv.sensor() != sensor {
            out.push(Violation::new(
                format!("features.{}", sensor.short_name()),
                format!("vector belongs to sensor {}", fv.sensor()),
            ));
        }
    }
    let mut seen = BTreeSet::new();
    for l in &example.labels {
        if l.label_name.is_empty() {
            out.push(Violation::new("labels", "label name must be nonempty"));
        } else if !seen.insert(l.label_name.as_str()) {
            out.push(Violation::new(
                format!("labels.{}", l.label_name),
                "label name appears more than once",
            ));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Platform {
    #[serde(rename = "iphone")]
    IPhone,
    Android,
    #[default]
    Unknown,
}

impl FromStr for Platform {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "iphone" | "ios" => Ok(Platform::IPhone),
            "android" => Ok(Platform::Android),
            "unknown" | "" => Ok(Platform::Unknown),
            other => Err(format!("unknown platform '{other}'")),
        }
    }
}

impl fmt::Display for Platform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Platform::IPhone => "iphone",
            Platform::Android => "android",
            Platform::Unknown => "unknown",
        })
    }
}

/// Examples grouped by user, ordered by user id then timestamp.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Dataset {
    users: BTreeMap<String, Vec<Example>>,
    vocabulary: Vec<String>,
    platforms: BTreeMap<String, Platform>,
    /// Labels whose stored values already went through cleaning.
    adjusted_labels: BTreeSet<String>,
}

impl Dataset {
    pub fn new(examples: Vec<Example>, vocabulary: Vec<String>) -> Self {
        let mut users: BTreeMap<String, Vec<Example>> = BTreeMap::new();
        for ex in examples {
            users.entry(ex.user_id.clone()).or_default().push(ex);
        }
        for list in users.values_mut() {
            list.sort_by_key(|e| e.timestamp);
        }
        Self {
            users,
            vocabulary,
            platforms: BTreeMap::new(),
            adjusted_labels: BTreeSet::new(),
        }
    }

    pub fn with_platforms(mut self, platforms: BTreeMap<String, Platform>) -> Self {
        self.platforms = platforms;
        self
    }

    pub fn with_adjusted_labels(mut self, labels: BTreeSet<String>) -> Self {
        self.adjusted_labels = labels;
        self
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn adjusted_labels(&self) -> &BTreeSet<String> {
        &self.adjusted_labels
    }

    pub fn platform(&self, user: &str) -> Platform {
        self.platforms.get(user).copied().unwrap_or_default()
    }

    pub fn platforms(&self) -> &BTreeMap<String, Platform> {
        &self.platforms
    }

    pub fn user_ids(&self) -> impl Iterator<Item = &str> {
        self.users.keys().map(String::as_str)
    }

    pub fn user_examples(&self, user: &str) -> &[Example] {
        self.users.get(user).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn examples(&self) -> impl Iterator<Item = &Example> {
        self.users.values().flatten()
    }

    pub fn examples_mut(&mut self) -> impl Iterator<Item = &mut Example> {
        self.users.values_mut().flatten()
    }

    pub fn len(&self) -> usize {
        self.users.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Examples that carry data from all six core sensors.
    pub fn core_subset(&self) -> Dataset {
        let users = self
            .users
            .iter()
            .filter_map(|(u, exs)| {
                let kept: Vec<_> = exs
                    .iter()
                    .filter(|e| e.has_all_core_sensors())
                    .cloned()
                    .collect();
                (!kept.is_empty()).then(|| (u.clone(), kept))
            })
            .collect();
        Dataset {
            users,
            vocabulary: self.vocabulary.clone(),
            platforms: self.platforms.clone(),
            adjusted_labels: self.adjusted_labels.clone(),
        }
    }

    /// Per sensor: number of examples and set of users with data.
    pub fn availability(&self) -> BTreeMap<Sensor, (usize, BTreeSet<String>)> {
        let mut out: BTreeMap<Sensor, (usize, BTreeSet<String>)> = BTreeMap::new();
        for ex in self.examples() {
            for s in Sensor::ALL {
                if ex.has_sensor(s) {
                    let entry = out.entry(s).or_default();
                    entry.0 += 1;
                    entry.1.insert(ex.user_id.clone());
                }
            }
        }
        out
    }

    /// Validates every example plus vocabulary membership of label names.
    pub fn validate(&self) -> Vec<(ExampleId, Violation)> {
        let vocab: BTreeSet<&str> = self.vocabulary.iter().map(String::as_str).collect();
        let mut out = Vec::new();
        for ex in self.examples() {
            for v in validate_example(ex) {
                out.push((ex.id(), v));
            }
            for l in &ex.labels {
                if !vocab.contains(l.label_name.as_str()) {
                    out.push((
                        ex.id(),
                        Violation::new(
                            format!("labels.{}", l.label_name),
                            "label is not in the dataset vocabulary",
                        ),
                    ));
                }
            }
        }
        out
    }
}
