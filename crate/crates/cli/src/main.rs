//! `ctxrec`: feature extraction, cross-validated evaluation and
//! personalization runs over per-user feature tables.
//!
//! Every run writes `manifest.json` next to its outputs. `ctxrec rerun`
//! replays a manifest and verifies that the outputs come out byte-identical.
//!
//! Exit status: 0 success, 2 bad input data, 3 inconsistent configuration,
//! 4 internal failure or a rerun that does not reproduce.

mod commands;
mod error;
mod manifest;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ctxrec_core::evaluation::{partition_folds, FoldPartition};
use ctxrec_core::ingest::{list_feature_files, user_id_from_path};
use ctxrec_core::Platform;

use commands::{default_labels, parse_platforms, read_labels_file, read_partition, read_text, PLATFORMS_FILE};
use error::CliError;
use manifest::{EvaluateConfig, ExtractConfig, PersonalizeConfig, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "ctxrec", version, about = "Context recognition from phone and watch sensors")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "CTXREC_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Extract feature tables from raw session bundles.
    Extract(ExtractArgs),
    /// Cross-validate single-sensor and fusion systems.
    Evaluate(EvaluateArgs),
    /// Compare universal, individual and adapted models for one user.
    Personalize(PersonalizeArgs),
    /// Replay a recorded run and check that it reproduces.
    Rerun(RerunArgs),
}

#[derive(Debug, Args)]
struct ExtractArgs {
    /// Directory searched recursively for session bundles.
    #[arg(long, env = "CTXREC_INPUT_DIR")]
    input: PathBuf,
    #[arg(long, env = "CTXREC_OUT_DIR")]
    out: PathBuf,
    /// UTC offset in hours for sessions whose metadata has none.
    #[arg(long, env = "CTXREC_UTC_OFFSET", allow_hyphen_values = true)]
    utc_offset: Option<f64>,
    /// Write gzip-compressed tables.
    #[arg(long)]
    gzip: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Five subject folds.
    Cv5,
    /// One fold per user, with C fixed at 1.
    Loo,
}

#[derive(Debug, Args)]
struct DataArgs {
    #[arg(long, env = "CTXREC_FEATURES_DIR")]
    features_dir: PathBuf,
    /// Labels file, one label per line (default: the 25 standard labels).
    #[arg(long, env = "CTXREC_LABELS")]
    labels: Option<PathBuf>,
    /// Partition file (one fold of user ids per line) or fold directory.
    #[arg(long, env = "CTXREC_PARTITION")]
    partition: Option<PathBuf>,
    /// Place anchors for location-based label cleaning.
    #[arg(long, env = "CTXREC_ANCHORS")]
    anchors: Option<PathBuf>,
    #[arg(long, env = "CTXREC_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, env = "CTXREC_OUT_DIR")]
    out: PathBuf,
    /// Also write Markdown tables.
    #[arg(long)]
    markdown: bool,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Comma-separated systems: acc, gyro, wacc, loc, aud, ps, ef, lfa, lfl.
    #[arg(long, value_delimiter = ',', default_value = "acc,gyro,wacc,loc,aud,ps,ef,lfa,lfl")]
    systems: Vec<String>,
    #[arg(long, value_enum, default_value_t = Mode::Cv5)]
    mode: Mode,
}

#[derive(Debug, Args)]
struct PersonalizeArgs {
    #[command(flatten)]
    data: DataArgs,
    /// The test user.
    #[arg(long)]
    user: String,
}

#[derive(Debug, Args)]
struct RerunArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Output directory of the replay.
    #[arg(long, env = "CTXREC_OUT_DIR")]
    out: PathBuf,
}

/// Users and platforms of a features directory, read from file names.
fn dataset_users(dir: &Path) -> Result<Vec<(String, Platform)>, CliError> {
    let platforms_path = dir.join(PLATFORMS_FILE);
    let platforms = if platforms_path.is_file() {
        parse_platforms(&read_text(&platforms_path)?)?
    } else {
        BTreeMap::new()
    };
    let files = list_feature_files(dir)?;
    if files.is_empty() {
        return Err(CliError::Input(format!("no feature tables in {}", dir.display())));
    }
    let mut users: Vec<(String, Platform)> = files
        .iter()
        .filter_map(|p| user_id_from_path(p))
        .map(|u| {
            let p = platforms.get(&u).copied().unwrap_or(Platform::Unknown);
            (u, p)
        })
        .collect();
    users.sort_by(|a, b| a.0.cmp(&b.0));
    users.dedup_by(|a, b| a.0 == b.0);
    Ok(users)
}

fn resolve_labels(data: &DataArgs) -> Result<Vec<String>, CliError> {
    match &data.labels {
        Some(p) => read_labels_file(p),
        None => Ok(default_labels()),
    }
}

fn resolve_anchors(data: &DataArgs) -> Result<Option<String>, CliError> {
    data.anchors.as_deref().map(read_text).transpose()
}

fn resolve_partition(data: &DataArgs, folds: Option<usize>) -> Result<FoldPartition, CliError> {
    if let Some(p) = &data.partition {
        return Ok(read_partition(p)?.0);
    }
    let users = dataset_users(&data.features_dir)?;
    Ok(match folds {
        Some(k) => partition_folds(&users, k, data.seed)?,
        None => FoldPartition::leave_one_out(&users.iter().map(|(u, _)| u.as_str()).collect::<Vec<_>>())?,
    })
}

fn evaluate_config(args: &EvaluateArgs) -> Result<EvaluateConfig, CliError> {
    let d = &args.data;
    let (folds, fixed_cost) = match args.mode {
        Mode::Cv5 => (Some(5), None),
        Mode::Loo => (None, Some(1.0)),
    };
    let partition = resolve_partition(d, folds)?;
    commands::evaluate::parse_systems(&args.systems)?;
    Ok(EvaluateConfig {
        features_dir: d.features_dir.clone(),
        labels: resolve_labels(d)?,
        systems: args.systems.iter().map(|s| s.trim().to_ascii_lowercase()).collect(),
        mode: match args.mode {
            Mode::Cv5 => "cv5",
            Mode::Loo => "loo",
        }
        .to_string(),
        seed: d.seed,
        fixed_cost,
        partition: partition.folds,
        anchors: resolve_anchors(d)?,
        markdown: d.markdown,
    })
}

fn personalize_config(args: &PersonalizeArgs) -> Result<PersonalizeConfig, CliError> {
    let d = &args.data;
    let partition = if d.partition.is_some() {
        resolve_partition(d, Some(5))?
    } else {
        // small datasets still get a subject partition
        let n = dataset_users(&d.features_dir)?.len();
        resolve_partition(d, Some(n.clamp(1, 5)))?
    };
    Ok(PersonalizeConfig {
        features_dir: d.features_dir.clone(),
        user: args.user.clone(),
        labels: resolve_labels(d)?,
        seed: d.seed,
        partition: partition.folds,
        anchors: resolve_anchors(d)?,
        markdown: d.markdown,
    })
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(jobs) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global()
            .map_err(|e| CliError::Internal(e.to_string()))?;
    }
    match cli.command {
        Command::Extract(a) => {
            let config = RunConfig::Extract(ExtractConfig {
                input: a.input,
                utc_offset_hours: a.utc_offset,
                gzip: a.gzip,
            });
            commands::rerun::execute(&config, &a.out).map(|_| ())
        }
        Command::Evaluate(a) => {
            let config = RunConfig::Evaluate(evaluate_config(&a)?);
            commands::rerun::execute(&config, &a.data.out).map(|_| ())
        }
        Command::Personalize(a) => {
            let config = RunConfig::Personalize(personalize_config(&a)?);
            commands::rerun::execute(&config, &a.data.out).map(|_| ())
        }
        Command::Rerun(a) => commands::rerun::run(&a.manifest, &a.out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
