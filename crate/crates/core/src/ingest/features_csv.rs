//! Per-user feature tables: `<user>.features_labels.csv` (optionally gzipped).
//!
//! The first column is `timestamp` (integer unix seconds). Sensor feature
//! columns are grouped by name prefix:
//!
//! | sensor | prefixes | width |
//! |--------|----------|-------|
//! | Acc | `raw_acc:` | 26 |
//! | Gyro | `proc_gyro:` | 26 |
//! | WAcc | `watch_acceleration:` | 46 |
//! | Loc | `location_quick_features:`, `location:` | 17 |
//! | Aud | `audio_naive:` | 26 |
//! | PS | `discrete:` | 34 |
//!
//! Columns with a known canonical name are placed at their canonical index;
//! a group with any unrecognized name is taken in file order. Label columns
//! start with `label:` and hold `1`, `0`, or an empty / `nan` cell for
//! missing. Known non-core groups are skipped; every other column is kept as
//! example metadata.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use flate2::write::GzEncoder;
use flate2::Compression;
use rayon::prelude::*;

use super::IngestError;
use crate::features::names::{column_prefixes, feature_names, NON_CORE_PREFIXES};
use crate::labels::{self, LABEL_COLUMN_PREFIX};
use crate::sensor::{Dataset, Example, FeatureVector, LabelValue, Sensor};

pub const TIMESTAMP_COLUMN: &str = "timestamp";
pub const FEATURES_FILE_SUFFIX: &str = ".features_labels.csv";

/// Parsed content of one user's feature table.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub user_id: String,
    pub examples: Vec<Example>,
    /// Canonical label names in column order.
    pub labels: Vec<String>,
    /// Canonical names whose column already holds cleaned values.
    pub adjusted_labels: BTreeSet<String>,
}

fn sensor_of_column(name: &str) -> Option<Sensor> {
    Sensor::ALL
        .into_iter()
        .find(|&s| column_prefixes(s).iter().any(|p| name.starts_with(p)))
}

enum ColumnRole {
    Timestamp,
    Feature,
    Label { canonical: String },
    /// Raw label column shadowed by an adjusted column of the same label.
    ShadowedLabel,
    Ignored,
    Metadata,
}

struct Layout {
    roles: Vec<ColumnRole>,
    /// Per sensor, the target index of each of its columns in file order.
    placement: BTreeMap<Sensor, Vec<(usize, usize)>>,
    labels: Vec<String>,
    adjusted: BTreeSet<String>,
}

fn build_layout(header: &[String]) -> Result<Layout, IngestError> {
    let mut seen = BTreeSet::new();
    for h in header {
        if !seen.insert(h.as_str()) {
            return Err(IngestError::DuplicateColumn(h.clone()));
        }
    }
    if header.first().map(String::as_str) != Some(TIMESTAMP_COLUMN) {
        return Err(IngestError::MissingTimestampColumn);
    }
    // adjusted columns win over raw columns of the same label
    let mut adjusted_targets = BTreeSet::new();
    for h in header {
        if let Some(col) = h.strip_prefix(LABEL_COLUMN_PREFIX) {
            if labels::is_adjusted_column(col) {
                adjusted_targets.insert(labels::canonical_label(col));
            }
        }
    }
    let mut roles = Vec::with_capacity(header.len());
    let mut groups: BTreeMap<Sensor, Vec<usize>> = BTreeMap::new();
    let mut label_list = Vec::new();
    let mut adjusted = BTreeSet::new();
    let mut warned = BTreeSet::new();
    for (i, h) in header.iter().enumerate() {
        let role = if i == 0 {
            ColumnRole::Timestamp
        } else if let Some(s) = sensor_of_column(h) {
            groups.entry(s).or_default().push(i);
            ColumnRole::Feature
        } else if let Some(col) = h.strip_prefix(LABEL_COLUMN_PREFIX) {
            let canonical = labels::canonical_label(col);
            let is_adjusted = labels::is_adjusted_column(col);
            if !is_adjusted && adjusted_targets.contains(&canonical) {
                ColumnRole::ShadowedLabel
            } else {
                if is_adjusted {
                    adjusted.insert(canonical.clone());
                }
                label_list.push(canonical.clone());
                ColumnRole::Label { canonical }
            }
        } else if NON_CORE_PREFIXES.iter().any(|p| h.starts_with(p)) {
            ColumnRole::Ignored
        } else {
            if let Some((prefix, _)) = h.split_once(':') {
                if warned.insert(prefix.to_string()) {
                    log::warn!("unknown column group `{prefix}:` kept as metadata");
                }
            }
            ColumnRole::Metadata
        };
        roles.push(role);
    }
    let mut placement = BTreeMap::new();
    for (sensor, cols) in groups {
        if cols.len() != sensor.dim() {
            return Err(IngestError::GroupWidth {
                sensor,
                expected: sensor.dim(),
                got: cols.len(),
            });
        }
        let names = feature_names(sensor);
        let index: BTreeMap<&str, usize> = names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        let by_name: Option<Vec<(usize, usize)>> = cols
            .iter()
            .map(|&c| index.get(header[c].as_str()).map(|&t| (c, t)))
            .collect();
        let places = by_name.unwrap_or_else(|| cols.iter().enumerate().map(|(t, &c)| (c, t)).collect());
        placement.insert(sensor, places);
    }
    Ok(Layout {
        roles,
        placement,
        labels: label_list,
        adjusted,
    })
}

fn parse_value(cell: &str) -> Option<Result<f64, ()>> {
    let t = cell.trim();
    if t.is_empty() || t.eq_ignore_ascii_case("nan") {
        return None;
    }
    Some(t.parse::<f64>().map_err(|_| ()))
}

fn parse_label(cell: &str) -> Option<LabelValue> {
    match cell.trim() {
        "" => Some(LabelValue::Missing),
        t if t.eq_ignore_ascii_case("nan") => Some(LabelValue::Missing),
        "1" | "1.0" => Some(LabelValue::Relevant),
        "0" | "0.0" => Some(LabelValue::NotRelevant),
        _ => None,
    }
}

/// Parses one user's table. Line numbers in errors are 1-based file lines.
pub fn parse_features_csv<R: Read>(reader: R, user_id: &str) -> Result<FeatureTable, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr
        .headers()
        .map_err(|e| IngestError::Csv { line: 1, message: e.to_string() })?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let layout = build_layout(&header)?;
    let mut examples = Vec::new();
    let mut timestamps = BTreeMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| IngestError::Csv {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != header.len() {
            return Err(IngestError::Ragged {
                line,
                expected: header.len(),
                got: record.len(),
            });
        }
        let ts_cell = record.get(0).unwrap_or("").trim();
        let timestamp: i64 = ts_cell.parse().map_err(|_| IngestError::InvalidCell {
            line,
            column: TIMESTAMP_COLUMN.to_string(),
            value: ts_cell.to_string(),
        })?;
        if let Some(prev) = timestamps.insert(timestamp, line) {
            return Err(IngestError::DuplicateTimestamp { line, first_line: prev, timestamp });
        }
        let mut ex = Example::new(user_id, timestamp);
        for (sensor, places) in &layout.placement {
            let mut values = vec![f64::NAN; sensor.dim()];
            let mut missing = vec![true; sensor.dim()];
            for &(c, t) in places {
                let cell = &record[c];
                match parse_value(cell) {
                    None => {}
                    Some(Ok(v)) => {
                        values[t] = v;
                        missing[t] = false;
                    }
                    Some(Err(())) => {
                        return Err(IngestError::InvalidCell {
                            line,
                            column: header[c].clone(),
                            value: cell.to_string(),
                        })
                    }
                }
            }
            if missing.iter().any(|m| !m) {
                ex.features.insert(*sensor, FeatureVector::new(*sensor, values, missing)?);
            }
        }
        for (c, role) in layout.roles.iter().enumerate() {
            match role {
                ColumnRole::Label { canonical } => {
                    let v = parse_label(&record[c]).ok_or_else(|| IngestError::InvalidLabel {
                        line,
                        column: header[c].clone(),
                        value: record[c].to_string(),
                    })?;
                    ex.labels.push(crate::sensor::LabelAssignment::new(canonical.clone(), v));
                }
                ColumnRole::Metadata | ColumnRole::ShadowedLabel => {
                    ex.metadata.insert(header[c].clone(), record[c].to_string());
                }
                _ => {}
            }
        }
        examples.push(ex);
    }
    examples.sort_by_key(|e| e.timestamp);
    Ok(FeatureTable {
        user_id: user_id.to_string(),
        examples,
        labels: layout.labels,
        adjusted_labels: layout.adjusted,
    })
}

/// User id from a file name like `<uuid>.features_labels.csv[.gz]`.
pub fn user_id_from_path(path: &Path) -> Option<String> {
    let name = path.file_name()?.to_str()?;
    let stem = name.strip_suffix(".gz").unwrap_or(name);
    stem.strip_suffix(FEATURES_FILE_SUFFIX).map(str::to_string)
}

fn open(path: &Path) -> Result<Box<dyn Read>, IngestError> {
    let f = File::open(path).map_err(|e| IngestError::io(path, e))?;
    if path.extension().is_some_and(|e| e == "gz") {
        Ok(Box::new(GzDecoder::new(BufReader::new(f))))
    } else {
        Ok(Box::new(BufReader::new(f)))
    }
}

pub fn read_features_file(path: &Path) -> Result<FeatureTable, IngestError> {
    let user = user_id_from_path(path).ok_or_else(|| IngestError::Io {
        path: path.to_path_buf(),
        message: format!("file name does not end in {FEATURES_FILE_SUFFIX}[.gz]"),
    })?;
    parse_features_csv(open(path)?, &user).map_err(|e| e.in_file(path))
}

/// Feature files in a directory, sorted by name.
pub fn list_feature_files(dir: &Path) -> Result<Vec<PathBuf>, IngestError> {
    let mut out: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| IngestError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| user_id_from_path(p).is_some())
        .collect();
    out.sort();
    Ok(out)
}

/// Reads every user file in `dir` in parallel and merges them in user order.
/// The vocabulary is the sorted union of label columns.
pub fn read_features_dir(dir: &Path) -> Result<Dataset, IngestError> {
    let files = list_feature_files(dir)?;
    if files.is_empty() {
        return Err(IngestError::NoInput(dir.to_path_buf()));
    }
    let tables: Vec<FeatureTable> = files
        .par_iter()
        .map(|p| read_features_file(p))
        .collect::<Result<_, _>>()?;
    Ok(dataset_from_tables(tables))
}

pub fn dataset_from_tables(tables: Vec<FeatureTable>) -> Dataset {
    let mut vocab = BTreeSet::new();
    let mut adjusted = BTreeSet::new();
    let mut examples = Vec::new();
    for t in tables {
        vocab.extend(t.labels);
        adjusted.extend(t.adjusted_labels);
        examples.extend(t.examples);
    }
    Dataset::new(examples, vocab.into_iter().collect()).with_adjusted_labels(adjusted)
}

fn format_value(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        v.to_string()
    }
}

/// Writes a feature table with the canonical 175 feature columns, one label
/// column per entry of `labels` and the union of
/// metadata keys in sorted order. Masked values and absent sensors are empty.
pub fn write_features_csv<W: Write>(
    examples: &[&Example],
    labels: &[String],
    adjusted: &BTreeSet<String>,
    writer: W,
) -> Result<(), IngestError> {
    let mut w = csv::WriterBuilder::new().from_writer(writer);
    let meta_keys: BTreeSet<&str> = examples.iter().flat_map(|e| e.metadata.keys().map(String::as_str)).collect();
    let mut header = vec![TIMESTAMP_COLUMN.to_string()];
    for s in Sensor::ALL {
        header.extend(feature_names(s));
    }
    let columns: Vec<String> = labels
        .iter()
        .map(|l| labels::column_name(l, adjusted.contains(l)))
        .collect();
    header.extend(columns.iter().map(|c| format!("{LABEL_COLUMN_PREFIX}{c}")));
    header.extend(meta_keys.iter().map(|k| k.to_string()));
    w.write_record(&header).map_err(IngestError::from_csv)?;
    for ex in examples {
        let mut row = vec![ex.timestamp.to_string()];
        for s in Sensor::ALL {
            match ex.features.get(&s) {
                Some(fv) => row.extend(fv.values().iter().map(|&v| format_value(v))),
                None => row.extend(std::iter::repeat_n(String::new(), s.dim())),
            }
        }
        for l in labels {
            row.push(
                match ex.label(l) {
                    LabelValue::Relevant => "1",
                    LabelValue::NotRelevant => "0",
                    LabelValue::Missing => "",
                }
                .to_string(),
            );
        }
        for k in &meta_keys {
            row.push(ex.metadata.get(*k).cloned().unwrap_or_default());
        }
        w.write_record(&row).map_err(IngestError::from_csv)?;
    }
    w.flush().map_err(|e| IngestError::Io {
        path: PathBuf::new(),
        message: e.to_string(),
    })?;
    Ok(())
}

/// Writes `<dir>/<user>.features_labels.csv[.gz]`.
pub fn write_features_file(
    dir: &Path,
    user: &str,
    examples: &[&Example],
    labels: &[String],
    adjusted: &BTreeSet<String>,
    gzip: bool,
) -> Result<PathBuf, IngestError> {
    let name = format!("{user}{FEATURES_FILE_SUFFIX}{}", if gzip { ".gz" } else { "" });
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| IngestError::io(&path, e))?;
    if gzip {
        let mut enc = GzEncoder::new(f, Compression::default());
        write_features_csv(examples, labels, adjusted, &mut enc)?;
        enc.finish().map_err(|e| IngestError::io(&path, e))?;
    } else {
        write_features_csv(examples, labels, adjusted, std::io::BufWriter::new(f))?;
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header_with(extra: &[&str]) -> String {
        let mut h = vec![TIMESTAMP_COLUMN.to_string()];
        for s in Sensor::ALL {
            h.extend(feature_names(s));
        }
        h.extend(extra.iter().map(|s| s.to_string()));
        h.join(",")
    }

    fn row(ts: i64, fill: &str, extra: &[&str]) -> String {
        let mut r = vec![ts.to_string()];
        r.extend(std::iter::repeat_n(fill.to_string(), 175));
        r.extend(extra.iter().map(|s| s.to_string()));
        r.join(",")
    }

    #[test]
    fn parses_groups_labels_and_metadata() {
        let text = format!(
            "{}\n{}\n",
            header_with(&["label:SITTING", "label:FIX_walking", "label_source"]),
            row(100, "0.5", &["1", "", "2"])
        );
        let t = parse_features_csv(text.as_bytes(), "u").unwrap();
        assert_eq!(t.labels, vec!["SITTING".to_string(), "WALKING".to_string()]);
        assert!(t.adjusted_labels.contains("WALKING"));
        let ex = &t.examples[0];
        assert_eq!(ex.features.len(), 6);
        assert_eq!(ex.label("SITTING"), LabelValue::Relevant);
        assert_eq!(ex.label("WALKING"), LabelValue::Missing);
        assert_eq!(ex.metadata["label_source"], "2");
    }

    #[test]
    fn empty_group_is_absent() {
        let mut cells = vec!["1".to_string()];
        cells.extend(std::iter::repeat_n(String::new(), 26));
        cells.extend(std::iter::repeat_n("0.1".to_string(), 149));
        let text = format!("{}\n{}\n", header_with(&[]), cells.join(","));
        let t = parse_features_csv(text.as_bytes(), "u").unwrap();
        assert!(t.examples[0].feature(Sensor::Acc).is_none());
        assert!(t.examples[0].feature(Sensor::Gyro).is_some());
    }

    #[test]
    fn structural_errors_carry_lines() {
        let h = header_with(&[]);
        let dup = format!("{h}\n{}\n{}\n", row(5, "1", &[]), row(5, "1", &[]));
        assert!(matches!(
            parse_features_csv(dup.as_bytes(), "u"),
            Err(IngestError::DuplicateTimestamp { line: 3, first_line: 2, .. })
        ));
        let ragged = format!("{h}\n{}\n1,2\n", row(5, "1", &[]));
        assert!(matches!(
            parse_features_csv(ragged.as_bytes(), "u"),
            Err(IngestError::Ragged { line: 3, .. })
        ));
        let bad = format!("{h}\n{}\n", row(5, "abc", &[]));
        assert!(matches!(
            parse_features_csv(bad.as_bytes(), "u"),
            Err(IngestError::InvalidCell { line: 2, .. })
        ));
        let narrow = h.replacen(",raw_acc:magnitude_stats:mean", "", 1);
        assert!(matches!(
            parse_features_csv(format!("{narrow}\n").as_bytes(), "u"),
            Err(IngestError::GroupWidth { sensor: Sensor::Acc, expected: 26, got: 25 })
        ));
    }

    #[test]
    fn non_core_groups_are_ignored() {
        let text = format!("{}\n{}\n", header_with(&["raw_magnet:x", "lf_measurements:light"]), row(1, "2", &["3", "4"]));
        let t = parse_features_csv(text.as_bytes(), "u").unwrap();
        assert!(t.examples[0].metadata.is_empty());
    }

    #[test]
    fn user_ids_from_names() {
        assert_eq!(user_id_from_path(Path::new("/x/ABC.features_labels.csv.gz")).as_deref(), Some("ABC"));
        assert_eq!(user_id_from_path(Path::new("ABC.features_labels.csv")).as_deref(), Some("ABC"));
        assert_eq!(user_id_from_path(Path::new("ABC.csv")), None);
    }
}
