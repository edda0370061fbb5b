use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use ctxrec_core::features::SpectralConfig;
use ctxrec_core::ingest::{find_sessions, read_session_bundle, session_to_example, write_features_file};
use ctxrec_core::sensor::SensorData;
use ctxrec_core::{Example, Platform};
use rayon::prelude::*;

use super::{format_platforms, PLATFORMS_FILE};
use crate::error::CliError;
use crate::manifest::{ExtractConfig, Outputs};

pub struct ExtractSummary {
    pub sessions: usize,
    pub users: usize,
}

/// Extracts every session bundle under the input directory into one feature
/// table per user. Label columns are the sorted union of session labels.
pub fn run(config: &ExtractConfig, outputs: &mut Outputs) -> Result<ExtractSummary, CliError> {
    let dirs = find_sessions(&config.input)?;
    if dirs.is_empty() {
        return Err(CliError::Input(format!("no sessions found in {}", config.input.display())));
    }
    let spectral = SpectralConfig::default();
    let extracted: Vec<(Example, Option<Platform>)> = dirs
        .par_iter()
        .map(|d| {
            let bundle = read_session_bundle(d, config.utc_offset_hours)?;
            let platform = bundle.platform;
            let mut ex = session_to_example(bundle, &spectral)?;
            ex.sensor_data = SensorData::default();
            Ok((ex, platform))
        })
        .collect::<Result<_, ctxrec_core::ingest::IngestError>>()?;

    let sessions = extracted.len();
    let mut by_user: BTreeMap<String, Vec<Example>> = BTreeMap::new();
    let mut platforms: BTreeMap<String, Platform> = BTreeMap::new();
    let mut labels = BTreeSet::new();
    for ((ex, platform), dir) in extracted.into_iter().zip(&dirs) {
        labels.extend(ex.labels.iter().map(|l| l.label_name.clone()));
        if let Some(p) = platform {
            if let Some(prev) = platforms.insert(ex.user_id.clone(), p) {
                if prev != p {
                    return Err(CliError::Input(format!(
                        "{}: user {} has sessions from {prev} and {p}",
                        dir.display(),
                        ex.user_id
                    )));
                }
            }
        }
        by_user.entry(ex.user_id.clone()).or_default().push(ex);
    }
    let labels: Vec<String> = labels.into_iter().collect();
    for (user, examples) in &mut by_user {
        examples.sort_by_key(|e| e.timestamp);
        if let Some(w) = examples.windows(2).find(|w| w[0].timestamp == w[1].timestamp) {
            return Err(CliError::Input(format!("user {user} has two sessions at timestamp {}", w[0].timestamp)));
        }
        let refs: Vec<&Example> = examples.iter().collect();
        let path = write_features_file(outputs.dir(), user, &refs, &labels, &BTreeSet::new(), config.gzip)?;
        outputs.record(&file_name(&path))?;
    }
    if !platforms.is_empty() {
        outputs.write(PLATFORMS_FILE, format_platforms(&platforms).as_bytes())?;
    }
    Ok(ExtractSummary {
        sessions,
        users: by_user.len(),
    })
}

fn file_name(path: &Path) -> String {
    path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}
