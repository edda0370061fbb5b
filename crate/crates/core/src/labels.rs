//! Label vocabulary and name normalization.
//!
//! Canonical label names are uppercase with underscores (`LYING_DOWN`,
//! `AT_MAIN_WORKPLACE`). The table below maps human-readable display names and
//! the public dataset's column names onto the canonical form. Columns whose
//! dataset name carries one of the `FIX_`, `OR_` or `LOC_` prefixes already hold
//! the cleaned (adjusted) version of the label.

/// One entry of the label mapping table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LabelInfo {
    pub canonical: &'static str,
    pub display: &'static str,
    /// Column name in the released per-user feature files, without the `label:` prefix.
    pub dataset_column: &'static str,
    /// The dataset column already contains the cleaned version of this label.
    pub adjusted: bool,
}

const fn info(
    canonical: &'static str,
    display: &'static str,
    dataset_column: &'static str,
    adjusted: bool,
) -> LabelInfo {
    LabelInfo {
        canonical,
        display,
        dataset_column,
        adjusted,
    }
}

pub const LYING_DOWN: &str = "LYING_DOWN";
pub const SITTING: &str = "SITTING";
pub const WALKING: &str = "WALKING";
pub const RUNNING: &str = "RUNNING";
pub const BICYCLING: &str = "BICYCLING";
pub const EXERCISE: &str = "EXERCISE";
pub const INDOORS: &str = "INDOORS";
pub const OUTSIDE: &str = "OUTSIDE";
pub const AT_HOME: &str = "AT_HOME";
pub const AT_MAIN_WORKPLACE: &str = "AT_MAIN_WORKPLACE";
pub const AT_WORK: &str = "AT_WORK";
pub const AT_THE_BEACH: &str = "AT_THE_BEACH";
pub const AT_A_RESTAURANT: &str = "AT_A_RESTAURANT";
pub const ON_A_BUS: &str = "ON_A_BUS";
pub const IN_A_CAR: &str = "IN_A_CAR";
pub const DRIVE_DRIVER: &str = "DRIVE_-_I_M_THE_DRIVER";
pub const DRIVE_PASSENGER: &str = "DRIVE_-_I_M_A_PASSENGER";
pub const MOTORBIKE: &str = "MOTORBIKE";
pub const SKATEBOARDING: &str = "SKATEBOARDING";
pub const AT_THE_POOL: &str = "AT_THE_POOL";
pub const PLAYING_BASEBALL: &str = "PLAYING_BASEBALL";
pub const PLAYING_FRISBEE: &str = "PLAYING_FRISBEE";
pub const LIFTING_WEIGHTS: &str = "LIFTING_WEIGHTS";
pub const ELLIPTICAL_MACHINE: &str = "ELLIPTICAL_MACHINE";
pub const TREADMILL: &str = "TREADMILL";
pub const STATIONARY_BIKE: &str = "STATIONARY_BIKE";
pub const AT_THE_GYM: &str = "AT_THE_GYM";
pub const SLEEPING: &str = "SLEEPING";
pub const TOILET: &str = "TOILET";
pub const BATHING_BATH: &str = "BATHING_-_BATH";
pub const BATHING_SHOWER: &str = "BATHING_-_SHOWER";
pub const IN_CLASS: &str = "IN_CLASS";
pub const AT_A_BAR: &str = "AT_A_BAR";
pub const ELEVATOR: &str = "ELEVATOR";
pub const GARDENING: &str = "GARDENING";
pub const RAKING_LEAVES: &str = "RAKING_LEAVES";
pub const STROLLING: &str = "STROLLING";
pub const HIKING: &str = "HIKING";
pub const AT_SEA: &str = "AT_SEA";

/// The label mapping table. The first 51 entries are the labels shipped in the
/// primary dataset files; the rest appear only in co-label cleaning rules.
pub const KNOWN_LABELS: &[LabelInfo] = &[
    info(LYING_DOWN, "Lying down", "LYING_DOWN", false),
    info(SITTING, "Sitting", "SITTING", false),
    info(WALKING, "Walking", "FIX_walking", true),
    info(RUNNING, "Running", "FIX_running", true),
    info(BICYCLING, "Bicycling", "BICYCLING", false),
    info(SLEEPING, "Sleeping", "SLEEPING", false),
    info("LAB_WORK", "Lab work", "LAB_WORK", false),
    info(IN_CLASS, "In class", "IN_CLASS", false),
    info("IN_A_MEETING", "In a meeting", "IN_A_MEETING", false),
    info(AT_MAIN_WORKPLACE, "At main workplace", "LOC_main_workplace", true),
    info(INDOORS, "Indoors", "OR_indoors", true),
    info(OUTSIDE, "Outside", "OR_outside", true),
    info(IN_A_CAR, "In a car", "IN_A_CAR", false),
    info(ON_A_BUS, "On a bus", "ON_A_BUS", false),
    info(DRIVE_DRIVER, "Drive (I'm the driver)", "DRIVE_-_I_M_THE_DRIVER", false),
    info(DRIVE_PASSENGER, "Drive (I'm a passenger)", "DRIVE_-_I_M_A_PASSENGER", false),
    info(AT_HOME, "At home", "LOC_home", true),
    info(AT_A_RESTAURANT, "At a restaurant", "FIX_restaurant", true),
    info("PHONE_IN_POCKET", "Phone in pocket", "PHONE_IN_POCKET", false),
    info(EXERCISE, "Exercise", "OR_exercise", true),
    info("COOKING", "Cooking", "COOKING", false),
    info("SHOPPING", "Shopping", "SHOPPING", false),
    info(STROLLING, "Strolling", "STROLLING", false),
    info("DRINKING__ALCOHOL_", "Drinking (alcohol)", "DRINKING__ALCOHOL_", false),
    info(BATHING_SHOWER, "Bathing - shower", "BATHING_-_SHOWER", false),
    info("CLEANING", "Cleaning", "CLEANING", false),
    info("DOING_LAUNDRY", "Laundry", "DOING_LAUNDRY", false),
    info("WASHING_DISHES", "Washing dishes", "WASHING_DISHES", false),
    info("WATCHING_TV", "Watching TV", "WATCHING_TV", false),
    info("SURFING_THE_INTERNET", "Surfing the internet", "SURFING_THE_INTERNET", false),
    info("AT_A_PARTY", "At a party", "AT_A_PARTY", false),
    info(AT_A_BAR, "At a bar", "AT_A_BAR", false),
    info(AT_THE_BEACH, "At the beach", "LOC_beach", true),
    info("SINGING", "Singing", "SINGING", false),
    info("TALKING", "Talking", "TALKING", false),
    info("COMPUTER_WORK", "Computer work", "COMPUTER_WORK", false),
    info("EATING", "Eating", "EATING", false),
    info(TOILET, "Toilet", "TOILET", false),
    info("GROOMING", "Grooming", "GROOMING", false),
    info("DRESSING", "Dressing", "DRESSING", false),
    info(AT_THE_GYM, "At the gym", "AT_THE_GYM", false),
    info("STAIRS_-_GOING_UP", "Stairs - going up", "STAIRS_-_GOING_UP", false),
    info("STAIRS_-_GOING_DOWN", "Stairs - going down", "STAIRS_-_GOING_DOWN", false),
    info(ELEVATOR, "Elevator", "ELEVATOR", false),
    info("STANDING", "Standing", "OR_standing", true),
    info("AT_SCHOOL", "At school", "AT_SCHOOL", false),
    info("PHONE_IN_HAND", "Phone in hand", "PHONE_IN_HAND", false),
    info("PHONE_IN_BAG", "Phone in bag", "PHONE_IN_BAG", false),
    info("PHONE_ON_TABLE", "Phone on table", "PHONE_ON_TABLE", false),
    info("WITH_CO-WORKERS", "With co-workers", "WITH_CO-WORKERS", false),
    info("WITH_FRIENDS", "With friends", "WITH_FRIENDS", false),
    // Labels referenced only by co-label cleaning rules.
    info(MOTORBIKE, "Motorbike", "MOTORBIKE", false),
    info(SKATEBOARDING, "Skateboarding", "SKATEBOARDING", false),
    info(AT_THE_POOL, "At the pool", "AT_THE_POOL", false),
    info(PLAYING_BASEBALL, "Playing baseball", "PLAYING_BASEBALL", false),
    info(PLAYING_FRISBEE, "Playing frisbee", "PLAYING_FRISBEE", false),
    info(LIFTING_WEIGHTS, "Lifting weights", "LIFTING_WEIGHTS", false),
    info(ELLIPTICAL_MACHINE, "Elliptical machine", "ELLIPTICAL_MACHINE", false),
    info(TREADMILL, "Treadmill", "TREADMILL", false),
    info(STATIONARY_BIKE, "Stationary bike", "STATIONARY_BIKE", false),
    info(BATHING_BATH, "Bathing - bath", "BATHING_-_BATH", false),
    info(GARDENING, "Gardening", "GARDENING", false),
    info(RAKING_LEAVES, "Raking leaves", "RAKING_LEAVES", false),
    info(HIKING, "Hiking", "HIKING", false),
    info(AT_SEA, "At sea", "AT_SEA", false),
    info(AT_WORK, "At work", "AT_WORK", false),
];

/// Prefix of label columns in feature tables.
pub const LABEL_COLUMN_PREFIX: &str = "label:";

pub fn lookup(canonical: &str) -> Option<&'static LabelInfo> {
    KNOWN_LABELS.iter().find(|l| l.canonical == canonical)
}

/// Maps a display name, dataset column name or canonical name to the canonical form.
///
/// Names missing from the table are upper-cased with every character outside
/// `[A-Z0-9_-]` replaced by an underscore.
pub fn canonical_label(name: &str) -> String {
    let name = name.trim();
    let bare = name.strip_prefix(LABEL_COLUMN_PREFIX).unwrap_or(name);
    for l in KNOWN_LABELS {
        if l.canonical == bare || l.dataset_column == bare || l.display.eq_ignore_ascii_case(bare) {
            return l.canonical.to_string();
        }
    }
    bare.chars()
        .map(|c| {
            let c = c.to_ascii_uppercase();
            if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Human-readable name for a canonical label, falling back to the label itself.
pub fn display_name(canonical: &str) -> String {
    lookup(canonical)
        .map(|l| l.display.to_string())
        .unwrap_or_else(|| canonical.to_string())
}

/// Whether a dataset column header (with or without the `label:` prefix) holds an adjusted label.
pub fn is_adjusted_column(column: &str) -> bool {
    let bare = column.strip_prefix(LABEL_COLUMN_PREFIX).unwrap_or(column);
    KNOWN_LABELS
        .iter()
        .any(|l| l.adjusted && l.dataset_column == bare)
}

/// Column name (without `label:`) under which a label is written. Adjusted
/// labels use the dataset column so that they are recognized on reading.
pub fn column_name(canonical: &str, adjusted: bool) -> String {
    match lookup(canonical) {
        Some(l) if adjusted && l.adjusted => l.dataset_column.to_string(),
        _ => canonical.to_string(),
    }
}

/// Parses a labels file: one label per line, `#` starts a comment.
pub fn parse_label_list(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(canonical_label)
        .collect()
}
