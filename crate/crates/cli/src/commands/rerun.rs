use std::path::Path;
use std::time::Instant;

use super::{evaluate, extract, hash_features_dir, personalize};
use crate::error::CliError;
use crate::manifest::{hash_tree, Outputs, RunConfig, RunManifest};

/// Hash of the inputs a configuration reads.
pub fn input_hash(config: &RunConfig) -> Result<String, CliError> {
    match config {
        RunConfig::Extract(c) => hash_tree(&c.input, |_| true),
        RunConfig::Evaluate(c) => hash_features_dir(&c.features_dir),
        RunConfig::Personalize(c) => hash_features_dir(&c.features_dir),
    }
}

/// Runs a resolved configuration into `out` and returns its manifest.
pub fn execute(config: &RunConfig, out: &Path) -> Result<RunManifest, CliError> {
    let start = Instant::now();
    let input_sha256 = input_hash(config)?;
    let mut outputs = Outputs::create(out)?;
    let mut costs = Vec::new();
    match config {
        RunConfig::Extract(c) => {
            let s = extract::run(c, &mut outputs)?;
            println!("extracted {} sessions for {} users into {}", s.sessions, s.users, out.display());
        }
        RunConfig::Evaluate(c) => {
            let o = evaluate::run(c, &mut outputs)?;
            print!("{}", o.summary.to_markdown());
            costs = o.costs;
        }
        RunConfig::Personalize(c) => {
            let t = personalize::run(c, &mut outputs)?;
            print!("{}", t.to_markdown());
        }
    }
    let manifest = RunManifest {
        format_version: crate::manifest::MANIFEST_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: config.clone(),
        input_sha256,
        costs,
        outputs: outputs.into_hashes(),
        elapsed_seconds: start.elapsed().as_secs_f64(),
    };
    manifest.save(out)?;
    Ok(manifest)
}

/// Replays a manifest and checks inputs and outputs against it.
pub fn run(manifest_path: &Path, out: &Path) -> Result<(), CliError> {
    let recorded = RunManifest::load(manifest_path)?;
    let current = input_hash(&recorded.config)?;
    if current != recorded.input_sha256 {
        return Err(CliError::Config(format!(
            "input data changed since the recorded run (hash {current}, recorded {})",
            recorded.input_sha256
        )));
    }
    let replay = execute(&recorded.config, out)?;
    let mut problems = Vec::new();
    for (name, hash) in &recorded.outputs {
        match replay.outputs.get(name) {
            None => problems.push(format!("{name}: not produced")),
            Some(h) if h != hash => problems.push(format!("{name}: content differs")),
            Some(_) => {}
        }
    }
    for name in replay.outputs.keys().filter(|n| !recorded.outputs.contains_key(*n)) {
        problems.push(format!("{name}: not in the recorded run"));
    }
    if !problems.is_empty() {
        return Err(CliError::Internal(format!("rerun differs:\n  {}", problems.join("\n  "))));
    }
    println!("reproduced {} output files", replay.outputs.len());
    Ok(())
}
