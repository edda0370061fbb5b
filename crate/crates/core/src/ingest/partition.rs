//! Fold partition files.
//!
//! Two layouts are read: a single text file with one line of user ids per
//! fold, and a directory of `fold_<i>_test_<platform>_uuids.txt` files (one
//! id per line), which also yields each user's platform.

use std::collections::BTreeMap;
use std::path::Path;

use super::IngestError;
use crate::evaluation::FoldPartition;
use crate::sensor::Platform;

pub fn load_fold_partition(path: &Path) -> Result<FoldPartition, IngestError> {
    if path.is_dir() {
        return load_fold_directory(path).map(|(p, _)| p);
    }
    let text = std::fs::read_to_string(path).map_err(|e| IngestError::io(path, e))?;
    Ok(FoldPartition::parse(&text)?)
}

pub fn save_fold_partition(partition: &FoldPartition, path: &Path) -> Result<(), IngestError> {
    let mut text = String::new();
    if let Some(seed) = partition.seed {
        text.push_str(&format!("# seed {seed}\n"));
    }
    text.push_str(&partition.to_text());
    std::fs::write(path, text).map_err(|e| IngestError::io(path, e))
}

fn parse_fold_file_name(name: &str) -> Option<(usize, Platform)> {
    let rest = name.strip_prefix("fold_")?.strip_suffix("_uuids.txt")?;
    let (index, platform) = rest.split_once("_test_")?;
    Some((index.parse().ok()?, platform.parse().ok()?))
}

/// Reads a directory of per-fold, per-platform test-user lists. Fold indices
/// must be contiguous from 0.
pub fn load_fold_directory(dir: &Path) -> Result<(FoldPartition, BTreeMap<String, Platform>), IngestError> {
    let mut folds: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    let mut platforms = BTreeMap::new();
    let mut entries: Vec<_> = std::fs::read_dir(dir)
        .map_err(|e| IngestError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for path in entries {
        let Some((index, platform)) = path.file_name().and_then(|n| n.to_str()).and_then(parse_fold_file_name) else {
            continue;
        };
        let text = std::fs::read_to_string(&path).map_err(|e| IngestError::io(&path, e))?;
        let fold = folds.entry(index).or_default();
        for user in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
            fold.push(user.to_string());
            platforms.insert(user.to_string(), platform);
        }
    }
    if folds.is_empty() {
        return Err(IngestError::NoInput(dir.to_path_buf()));
    }
    if folds.keys().copied().ne(0..folds.len()) {
        return Err(IngestError::Session {
            path: dir.to_path_buf(),
            message: "fold indices are not contiguous from 0".into(),
        });
    }
    let mut folds: Vec<Vec<String>> = folds.into_values().collect();
    for f in &mut folds {
        f.sort();
    }
    Ok((FoldPartition::new(folds, None)?, platforms))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_directory_layout() {
        let dir = tempfile::tempdir().unwrap();
        let w = |n: &str, t: &str| std::fs::write(dir.path().join(n), t).unwrap();
        w("fold_0_test_android_uuids.txt", "a1\n");
        w("fold_0_test_iphone_uuids.txt", "i1\ni2\n");
        w("fold_1_test_iphone_uuids.txt", "i3\n");
        w("README", "x");
        let (p, plat) = load_fold_directory(dir.path()).unwrap();
        assert_eq!(p.folds, vec![vec!["a1", "i1", "i2"], vec!["i3"]]);
        assert_eq!(plat["a1"], Platform::Android);
        assert_eq!(plat["i3"], Platform::IPhone);
    }

    #[test]
    fn text_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = FoldPartition::new(vec![vec!["a".into(), "b".into()], vec!["c".into()]], Some(7)).unwrap();
        let path = dir.path().join("folds.txt");
        save_fold_partition(&p, &path).unwrap();
        assert_eq!(load_fold_partition(&path).unwrap().folds, p.folds);
    }
}
