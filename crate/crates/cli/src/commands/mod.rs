//! Subcommand implementations. Each one turns a resolved configuration into
//! output files; argument parsing and manifest bookkeeping stay in `main`.

use std::collections::BTreeMap;
use std::path::Path;

use ctxrec_core::cleaning::{clean_dataset, AnchorSet};
use ctxrec_core::evaluation::FoldPartition;
use ctxrec_core::ingest::{load_fold_directory, load_fold_partition, read_features_dir};
use ctxrec_core::ingest::features_csv::FEATURES_FILE_SUFFIX;
use ctxrec_core::labels::parse_label_list;
use ctxrec_core::{Dataset, Platform};

use crate::error::{io_error, CliError};
use crate::manifest::hash_tree;

pub mod evaluate;
pub mod extract;
pub mod personalize;
pub mod rerun;

/// Per-user platform list written next to extracted feature tables.
pub const PLATFORMS_FILE: &str = "platforms.tsv";

/// Labels evaluated when no labels file is given.
const DEFAULT_LABELS: &str = include_str!("../../../../data/labels_25.txt");

pub fn default_labels() -> Vec<String> {
    parse_label_list(DEFAULT_LABELS)
}

pub fn read_labels_file(path: &Path) -> Result<Vec<String>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    let labels = parse_label_list(&text);
    if labels.is_empty() {
        return Err(CliError::Config(format!("{}: no labels listed", path.display())));
    }
    Ok(labels)
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| io_error(path, e))
}

pub fn parse_platforms(text: &str) -> Result<BTreeMap<String, Platform>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (user, platform) = line
            .split_once('\t')
            .ok_or_else(|| CliError::Input(format!("{PLATFORMS_FILE} line {}: expected `user<TAB>platform`", i + 1)))?;
        let platform = platform
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("{PLATFORMS_FILE} line {}: unknown platform `{platform}`", i + 1)))?;
        out.insert(user.trim().to_string(), platform);
    }
    Ok(out)
}

pub fn format_platforms(platforms: &BTreeMap<String, Platform>) -> String {
    platforms.iter().map(|(u, p)| format!("{u}\t{p}\n")).collect()
}

fn is_dataset_file(path: &Path) -> bool {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
    name == PLATFORMS_FILE
        || name.ends_with(FEATURES_FILE_SUFFIX)
        || name.ends_with(&format!("{FEATURES_FILE_SUFFIX}.gz"))
}

/// Hash over the feature tables and platform list of a features directory.
pub fn hash_features_dir(dir: &Path) -> Result<String, CliError> {
    hash_tree(dir, is_dataset_file)
}

/// Reads a features directory, attaching platforms when a list is present.
pub fn load_dataset(dir: &Path) -> Result<Dataset, CliError> {
    let dataset = read_features_dir(dir)?;
    let platforms_path = dir.join(PLATFORMS_FILE);
    if platforms_path.is_file() {
        let platforms = parse_platforms(&read_text(&platforms_path)?)?;
        return Ok(dataset.with_platforms(platforms));
    }
    Ok(dataset)
}

/// Loads and cleans a dataset and checks that every requested label has a column.
pub fn prepare_dataset(dir: &Path, labels: &[String], anchors: Option<&str>) -> Result<Dataset, CliError> {
    let mut dataset = load_dataset(dir)?;
    let missing: Vec<&str> = labels
        .iter()
        .filter(|l| !dataset.vocabulary().contains(l))
        .map(String::as_str)
        .collect();
    if !missing.is_empty() {
        return Err(CliError::Config(format!(
            "labels not present in {}: {}",
            dir.display(),
            missing.join(", ")
        )));
    }
    let anchors = anchors
        .map(AnchorSet::parse)
        .transpose()
        .map_err(|e| CliError::Config(format!("anchors: {e}")))?;
    let changed = clean_dataset(&mut dataset, anchors.as_ref());
    log::info!("label cleaning changed {changed} assignments");
    Ok(dataset)
}

/// A partition file or fold directory; a directory also supplies platforms.
pub fn read_partition(path: &Path) -> Result<(FoldPartition, BTreeMap<String, Platform>), CliError> {
    if path.is_dir() {
        Ok(load_fold_directory(path)?)
    } else {
        Ok((load_fold_partition(path)?, BTreeMap::new()))
    }
}

pub fn partition_from_folds(folds: &[Vec<String>]) -> Result<FoldPartition, CliError> {
    Ok(FoldPartition::new(folds.to_vec(), None)?)
}

pub fn table_bytes(t: &ctxrec_core::evaluation::Table, markdown: bool) -> Vec<u8> {
    if markdown {
        t.to_markdown().into_bytes()
    } else {
        t.to_csv().into_bytes()
    }
}
