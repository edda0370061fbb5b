use ctxrec_core::classifier::TrainOptions;
use ctxrec_core::evaluation::report::{counts_table, format_score, lfl_weights_table, metric_table};
use ctxrec_core::evaluation::{cross_validate, CvOptions, CvResult, Metric, System, Table};

use super::{partition_from_folds, prepare_dataset, table_bytes};
use crate::error::CliError;
use crate::manifest::{CostEntry, EvaluateConfig, Outputs};

pub fn parse_systems(names: &[String]) -> Result<Vec<System>, CliError> {
    let mut systems: Vec<System> = names.iter().map(|n| n.parse()).collect::<Result<_, _>>()?;
    systems.sort();
    systems.dedup();
    if systems.is_empty() {
        return Err(CliError::Config("no systems selected".into()));
    }
    Ok(systems)
}

pub fn train_options(config: &EvaluateConfig) -> TrainOptions {
    match config.fixed_cost {
        Some(c) => TrainOptions::fixed(c),
        None => TrainOptions::grid(config.seed),
    }
}

/// Label-averaged metrics per system.
pub fn summary_table(result: &CvResult) -> Table {
    let header = ["system", "ba", "f1", "f1_defined", "accuracy"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let rows = result
        .systems
        .iter()
        .map(|&s| {
            let a = result.averages(s);
            vec![
                s.short_name().to_string(),
                format_score(a.ba),
                format_score(a.f1_zero_filled),
                format_score(a.f1_defined_only),
                format_score(a.accuracy),
            ]
        })
        .collect();
    Table { header, rows }
}

fn costs_table(costs: &[CostEntry]) -> Table {
    Table {
        header: ["label", "fold", "model", "cost", "fallback"].iter().map(|s| s.to_string()).collect(),
        rows: costs
            .iter()
            .map(|c| {
                vec![
                    c.label.clone(),
                    c.fold.to_string(),
                    c.model.clone(),
                    c.cost.to_string(),
                    c.fallback.to_string(),
                ]
            })
            .collect(),
    }
}

pub struct EvaluateOutcome {
    pub summary: Table,
    pub costs: Vec<CostEntry>,
}

pub fn run(config: &EvaluateConfig, outputs: &mut Outputs) -> Result<EvaluateOutcome, CliError> {
    let systems = parse_systems(&config.systems)?;
    let partition = partition_from_folds(&config.partition)?;
    let dataset = prepare_dataset(&config.features_dir, &config.labels, config.anchors.as_deref())?;
    let options = CvOptions::new(train_options(config), config.seed);
    let result = cross_validate(&dataset, &config.labels, &systems, &partition, &options)?;

    let mut costs: Vec<CostEntry> = result
        .costs
        .iter()
        .map(|c| CostEntry {
            label: c.label.clone(),
            fold: c.fold,
            model: c.model.clone(),
            cost: c.cost,
            fallback: c.fallback,
        })
        .collect();
    costs.sort_by(|a, b| (&a.label, a.fold, &a.model).cmp(&(&b.label, b.fold, &b.model)));

    for metric in Metric::ALL {
        let t = metric_table(&result, metric);
        outputs.write(&format!("{}.csv", metric.name()), &table_bytes(&t, false))?;
        if config.markdown {
            outputs.write(&format!("{}.md", metric.name()), &table_bytes(&t, true))?;
        }
    }
    let summary = summary_table(&result);
    outputs.write("summary.csv", &table_bytes(&summary, false))?;
    outputs.write("counts.csv", &table_bytes(&counts_table(&result), false))?;
    outputs.write("costs.csv", &table_bytes(&costs_table(&costs), false))?;
    if systems.contains(&System::Fusion(ctxrec_core::fusion::FusionVariant::LateLearned)) {
        let t = lfl_weights_table(&result);
        outputs.write("lfl_weights.csv", &table_bytes(&t, false))?;
        if config.markdown {
            outputs.write("lfl_weights.md", &table_bytes(&t, true))?;
        }
    }
    if config.markdown {
        outputs.write("summary.md", &table_bytes(&summary, true))?;
    }
    outputs.write("partition.txt", partition.to_text().as_bytes())?;
    Ok(EvaluateOutcome { summary, costs })
}
