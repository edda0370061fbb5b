use ctxrec_core::classifier::TrainOptions;
use ctxrec_core::evaluation::report::format_score;
use ctxrec_core::evaluation::{AverageReport, MetricReport, Table};
use ctxrec_core::personalization::{run_personalization, LabelComparison, ThreeWayAverage, MANY_EXAMPLES_THRESHOLD};

use super::{partition_from_folds, prepare_dataset, table_bytes};
use crate::error::CliError;
use crate::manifest::{Outputs, PersonalizeConfig};

const HEADER: [&str; 10] = [
    "label",
    "user_positives",
    "adaptation_positives",
    "individual_trivial",
    "universal_ba",
    "individual_ba",
    "adapted_ba",
    "universal_f1",
    "individual_f1",
    "adapted_f1",
];

fn label_row(l: &LabelComparison) -> Vec<String> {
    let ba = |r: &MetricReport| format_score(r.ba);
    let f1 = |r: &MetricReport| format_score(Some(r.f1));
    vec![
        l.label.clone(),
        l.user_positives.to_string(),
        l.adaptation_positives.to_string(),
        l.individual_trivial.to_string(),
        ba(&l.universal),
        ba(&l.individual),
        ba(&l.adapted),
        f1(&l.universal),
        f1(&l.individual),
        f1(&l.adapted),
    ]
}

fn average_row(name: &str, (u, i, a): ThreeWayAverage) -> Vec<String> {
    let ba = |r: &AverageReport| format_score(r.ba);
    let f1 = |r: &AverageReport| format_score(r.f1_zero_filled);
    vec![
        name.to_string(),
        String::new(),
        String::new(),
        u.labels.to_string(),
        ba(&u),
        ba(&i),
        ba(&a),
        f1(&u),
        f1(&i),
        f1(&a),
    ]
}

pub fn run(config: &PersonalizeConfig, outputs: &mut Outputs) -> Result<Table, CliError> {
    let partition = partition_from_folds(&config.partition)?;
    let dataset = prepare_dataset(&config.features_dir, &config.labels, config.anchors.as_deref())?;
    let report = run_personalization(
        &dataset,
        &config.user,
        &config.labels,
        Some(&partition),
        &TrainOptions::grid(config.seed),
    )?;

    let mut rows: Vec<Vec<String>> = report.labels.iter().map(label_row).collect();
    rows.push(average_row("average_all", report.average_all()));
    rows.push(average_row(
        &format!("average_over_{MANY_EXAMPLES_THRESHOLD}"),
        report.average_many(),
    ));
    let table = Table {
        header: HEADER.iter().map(|s| s.to_string()).collect(),
        rows,
    };
    outputs.write("personalization.csv", &table_bytes(&table, false))?;
    if config.markdown {
        outputs.write("personalization.md", &table_bytes(&table, true))?;
    }

    let mut probs = String::from("label,user_id,timestamp,universal,individual,adapted\n");
    for l in &report.labels {
        for (id, pu, pi, pa) in &l.probabilities {
            probs.push_str(&format!("{},{},{},{pu},{pi},{pa}\n", l.label, id.user_id, id.timestamp));
        }
    }
    outputs.write("probabilities.csv", probs.as_bytes())?;
    Ok(table)
}
