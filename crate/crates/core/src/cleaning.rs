//! Label cleaning: location-based corrections against per-user place anchors
//! and corrections derived from co-reported labels.
//!
//! Both adjustments return the updates they would make instead of mutating,
//! and both read only the example's pre-adjustment values.
//!
//! Anchor file format, one anchor per line, `#` starts a comment:
//!
//! ```text
//! <user_id> home <lat> <lon>
//! <user_id> main_workplace <lat> <lon>
//! <user_id|*> beach_region <lat_min> <lon_min> <lat_max> <lon_max>
//! ```
//!
//! A user may have up to two home lines. `*` applies a beach region to every user.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::geo::haversine_distance;
use crate::labels::*;
use crate::sensor::{Dataset, Example, LabelAssignment, LabelValue, LocationSeries};

/// Within this distance of an anchor center the label is set relevant.
pub const NEAR_METERS: f64 = 15.0;
/// Beyond this distance from every center the label is set not relevant.
pub const FAR_METERS: f64 = 100.0;
pub const MAX_HOME_CENTERS: usize = 2;
/// User id that applies an anchor to all users.
pub const ANY_USER: &str = "*";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CleaningError {
    #[error("anchor line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("user {0} has more than two home locations")]
    TooManyHomes(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum AnchorKind {
    Home,
    MainWorkplace,
    BeachRegion,
}

impl AnchorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AnchorKind::Home => "home",
            AnchorKind::MainWorkplace => "main_workplace",
            AnchorKind::BeachRegion => "beach_region",
        }
    }
}

impl FromStr for AnchorKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "home" => Ok(AnchorKind::Home),
            "main_workplace" => Ok(AnchorKind::MainWorkplace),
            "beach_region" => Ok(AnchorKind::BeachRegion),
            other => Err(format!("unknown anchor kind `{other}`")),
        }
    }
}

/// Axis-aligned latitude/longitude box, inclusive on all sides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub lat_min: f64,
    pub lon_min: f64,
    pub lat_max: f64,
    pub lon_max: f64,
}

impl BoundingBox {
    pub fn contains(&self, lat: f64, lon: f64) -> bool {
        (self.lat_min..=self.lat_max).contains(&lat) && (self.lon_min..=self.lon_max).contains(&lon)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnchorGeometry {
    Center { lat: f64, lon: f64 },
    Region(BoundingBox),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlaceAnchor {
    pub user_id: String,
    pub kind: AnchorKind,
    pub geometry: AnchorGeometry,
}

fn valid_coordinate(lat: f64, lon: f64) -> bool {
    lat.abs() <= 90.0 && lon.abs() <= 180.0
}

/// All anchors, grouped for lookup by user.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnchorSet {
    anchors: Vec<PlaceAnchor>,
}

impl AnchorSet {
    pub fn new(anchors: Vec<PlaceAnchor>) -> Result<Self, CleaningError> {
        let mut homes: BTreeMap<&str, usize> = BTreeMap::new();
        for a in &anchors {
            if a.kind == AnchorKind::Home {
                let n = homes.entry(a.user_id.as_str()).or_default();
                *n += 1;
                if *n > MAX_HOME_CENTERS {
                    return Err(CleaningError::TooManyHomes(a.user_id.clone()));
                }
            }
        }
        Ok(Self { anchors })
    }

    pub fn anchors(&self) -> &[PlaceAnchor] {
        &self.anchors
    }

    fn for_user<'a>(&'a self, user: &'a str, kind: AnchorKind) -> impl Iterator<Item = &'a PlaceAnchor> + 'a {
        self.anchors
            .iter()
            .filter(move |a| a.kind == kind && (a.user_id == user || a.user_id == ANY_USER))
    }

    pub fn centers(&self, user: &str, kind: AnchorKind) -> Vec<(f64, f64)> {
        self.for_user(user, kind)
            .filter_map(|a| match a.geometry {
                AnchorGeometry::Center { lat, lon } => Some((lat, lon)),
                AnchorGeometry::Region(_) => None,
            })
            .collect()
    }

    pub fn regions(&self, user: &str) -> Vec<BoundingBox> {
        self.for_user(user, AnchorKind::BeachRegion)
            .filter_map(|a| match a.geometry {
                AnchorGeometry::Region(b) => Some(b),
                AnchorGeometry::Center { .. } => None,
            })
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self, CleaningError> {
        let mut anchors = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| CleaningError::Parse { line: i + 1, message };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() < 2 {
                return Err(err("expected `user_id kind coordinates...`".into()));
            }
            let kind: AnchorKind = fields[1].parse().map_err(err)?;
            let nums: Vec<f64> = fields[2..]
                .iter()
                .map(|f| f.parse::<f64>().map_err(|_| err(format!("invalid number `{f}`"))))
                .collect::<Result<_, _>>()?;
            let geometry = match (kind, nums.as_slice()) {
                (AnchorKind::BeachRegion, &[lat_min, lon_min, lat_max, lon_max]) => {
                    if !valid_coordinate(lat_min, lon_min) || !valid_coordinate(lat_max, lon_max) {
                        return Err(err("coordinates out of range".into()));
                    }
                    if lat_min > lat_max || lon_min > lon_max {
                        return Err(err("region minimum exceeds maximum".into()));
                    }
                    AnchorGeometry::Region(BoundingBox {
                        lat_min,
                        lon_min,
                        lat_max,
                        lon_max,
                    })
                }
                (AnchorKind::BeachRegion, _) => return Err(err("beach_region needs 4 numbers".into())),
                (_, &[lat, lon]) => {
                    if !valid_coordinate(lat, lon) {
                        return Err(err("coordinates out of range".into()));
                    }
                    AnchorGeometry::Center { lat, lon }
                }
                _ => return Err(err(format!("{} needs 2 numbers", kind.as_str()))),
            };
            if fields[0] == ANY_USER && kind != AnchorKind::BeachRegion {
                return Err(err("only beach regions may apply to every user".into()));
            }
            anchors.push(PlaceAnchor {
                user_id: fields[0].to_string(),
                kind,
                geometry,
            });
        }
        Self::new(anchors)
    }
}

impl fmt::Display for AnchorSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for a in &self.anchors {
            match a.geometry {
                AnchorGeometry::Center { lat, lon } => {
                    writeln!(f, "{} {} {lat} {lon}", a.user_id, a.kind.as_str())?
                }
                AnchorGeometry::Region(b) => writeln!(
                    f,
                    "{} {} {} {} {} {}",
                    a.user_id,
                    a.kind.as_str(),
                    b.lat_min,
                    b.lon_min,
                    b.lat_max,
                    b.lon_max
                )?,
            }
        }
        Ok(())
    }
}

/// Coordinates of the update with the lowest horizontal accuracy value;
/// ties keep the earliest. Updates without an accuracy rank last.
pub fn best_fix(series: &LocationSeries) -> Option<(f64, f64)> {
    let mut best: Option<(f64, (f64, f64))> = None;
    for u in &series.updates {
        let (Some(lat), Some(lon)) = (u.latitude, u.longitude) else {
            continue;
        };
        let acc = u.horizontal_accuracy.unwrap_or(f64::INFINITY);
        if best.is_none_or(|(b, _)| acc < b) {
            best = Some((acc, (lat, lon)));
        }
    }
    best.map(|(_, c)| c)
}

fn distance_rule(
    current: LabelValue,
    fallback: LabelValue,
    fix: (f64, f64),
    centers: &[(f64, f64)],
) -> LabelValue {
    let d = centers
        .iter()
        .map(|&(lat, lon)| haversine_distance(fix.0, fix.1, lat, lon))
        .fold(f64::INFINITY, f64::min);
    if d <= NEAR_METERS {
        LabelValue::Relevant
    } else if d > FAR_METERS {
        LabelValue::NotRelevant
    } else if current == LabelValue::Missing {
        fallback
    } else {
        current
    }
}

/// Location-derived updates for `AT_HOME`, `AT_MAIN_WORKPLACE` and
/// `AT_THE_BEACH`. Examples without a fix, or users without anchors of a
/// kind, get no update for that label.
///
/// `AT_MAIN_WORKPLACE` inside the retention band keeps its own value, or takes
/// the reported `AT_WORK` value when it has none.
pub fn adjust_label_by_location(example: &Example, anchors: &AnchorSet) -> Vec<LabelAssignment> {
    let Some(fix) = example.sensor_data.location.as_ref().and_then(best_fix) else {
        return Vec::new();
    };
    let user = example.user_id.as_str();
    let mut out = Vec::new();
    let homes = anchors.centers(user, AnchorKind::Home);
    if !homes.is_empty() {
        let cur = example.label(AT_HOME);
        out.push(LabelAssignment::new(AT_HOME, distance_rule(cur, cur, fix, &homes)));
    }
    let work = anchors.centers(user, AnchorKind::MainWorkplace);
    if !work.is_empty() {
        let cur = example.label(AT_MAIN_WORKPLACE);
        let v = distance_rule(cur, example.label(AT_WORK), fix, &work);
        out.push(LabelAssignment::new(AT_MAIN_WORKPLACE, v));
    }
    if anchors.regions(user).iter().any(|b| b.contains(fix.0, fix.1)) {
        out.push(LabelAssignment::new(AT_THE_BEACH, LabelValue::Relevant));
    }
    out
}

pub const WALKING_NEGATORS: &[&str] = &[
    ON_A_BUS,
    IN_A_CAR,
    DRIVE_DRIVER,
    DRIVE_PASSENGER,
    MOTORBIKE,
    SKATEBOARDING,
    AT_THE_POOL,
];
pub const RUNNING_EXTRA_NEGATORS: &[&str] = &[PLAYING_BASEBALL, PLAYING_FRISBEE];
pub const EXERCISE_TRIGGERS: &[&str] = &[
    EXERCISE,
    RUNNING,
    BICYCLING,
    LIFTING_WEIGHTS,
    ELLIPTICAL_MACHINE,
    TREADMILL,
    STATIONARY_BIKE,
    AT_THE_GYM,
];
pub const INDOORS_TRIGGERS: &[&str] = &[
    INDOORS,
    SLEEPING,
    TOILET,
    BATHING_BATH,
    BATHING_SHOWER,
    IN_CLASS,
    AT_HOME,
    AT_A_BAR,
    AT_THE_GYM,
    ELEVATOR,
];
pub const OUTSIDE_TRIGGERS: &[&str] = &[
    OUTSIDE,
    SKATEBOARDING,
    PLAYING_BASEBALL,
    PLAYING_FRISBEE,
    GARDENING,
    RAKING_LEAVES,
    STROLLING,
    HIKING,
    AT_THE_BEACH,
    AT_SEA,
    MOTORBIKE,
];
pub const RESTAURANT_NEGATORS: &[&str] = &[ON_A_BUS, IN_A_CAR, DRIVE_DRIVER, DRIVE_PASSENGER, MOTORBIKE];

/// Updates implied by co-reported labels, each rule evaluated against the
/// example's original values. Only changes are returned.
pub fn adjust_label_by_colabels(example: &Example) -> Vec<LabelAssignment> {
    let reported = |names: &[&str]| names.iter().any(|n| example.label(n) == LabelValue::Relevant);
    let mut out = Vec::new();
    let mut set = |label: &str, value: LabelValue| {
        if example.label(label) != value {
            out.push(LabelAssignment::new(label, value));
        }
    };
    if reported(WALKING_NEGATORS) {
        set(WALKING, LabelValue::NotRelevant);
    }
    if reported(WALKING_NEGATORS) || reported(RUNNING_EXTRA_NEGATORS) {
        set(RUNNING, LabelValue::NotRelevant);
    }
    if reported(EXERCISE_TRIGGERS) {
        set(EXERCISE, LabelValue::Relevant);
    }
    if reported(INDOORS_TRIGGERS) {
        set(INDOORS, LabelValue::Relevant);
    }
    if reported(OUTSIDE_TRIGGERS) {
        set(OUTSIDE, LabelValue::Relevant);
    }
    if reported(RESTAURANT_NEGATORS) {
        set(AT_A_RESTAURANT, LabelValue::NotRelevant);
    }
    out
}

pub fn apply_updates(example: &mut Example, updates: &[LabelAssignment]) {
    for u in updates {
        example.set_label(&u.label_name, u.value);
    }
}

/// Applies both adjustments to every example, skipping labels whose stored
/// values are already adjusted. Co-label rules see the location-adjusted
/// values. Returns the number of changed assignments.
pub fn clean_dataset(dataset: &mut Dataset, anchors: Option<&AnchorSet>) -> usize {
    let skip: BTreeSet<String> = dataset.adjusted_labels().clone();
    let mut changed = 0;
    for ex in dataset.examples_mut() {
        let mut updates = anchors.map(|a| adjust_label_by_location(ex, a)).unwrap_or_default();
        updates.retain(|u| !skip.contains(&u.label_name) && ex.label(&u.label_name) != u.value);
        changed += updates.len();
        apply_updates(ex, &updates);
        let mut co = adjust_label_by_colabels(ex);
        co.retain(|u| !skip.contains(&u.label_name));
        changed += co.len();
        apply_updates(ex, &co);
    }
    changed
}
