//! Result tables: CSV for machines and a Markdown rendering for people.

use super::cv::{CvResult, System};
use super::metrics::Metric;

/// A header plus rows of preformatted cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn csv_cell(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn format_score(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

impl Table {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for row in std::iter::once(&self.header).chain(&self.rows) {
            let cells: Vec<String> = row.iter().map(|c| csv_cell(c)).collect();
            s.push_str(&cells.join(","));
            s.push('\n');
        }
        s
    }

    pub fn to_markdown(&self) -> String {
        let widths: Vec<usize> = (0..self.header.len())
            .map(|j| {
                std::iter::once(&self.header)
                    .chain(&self.rows)
                    .map(|r| r.get(j).map_or(0, |c| c.chars().count()))
                    .max()
                    .unwrap_or(0)
                    .max(3)
            })
            .collect();
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, &w)| format!("{c:<w$}"))
                .collect();
            format!("| {} |\n", padded.join(" | "))
        };
        let mut s = line(&self.header);
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        s.push_str(&line(&rule));
        for r in &self.rows {
            s.push_str(&line(r));
        }
        s
    }
}

/// Per-label table of one metric: `label, n_e, n_s, p99, <systems...>`,
/// followed by average rows. For F1 two average rows are emitted, one
/// counting undefined values as 0 and one over defined values only.
pub fn metric_table(result: &CvResult, metric: Metric) -> Table {
    let mut header: Vec<String> = ["label", "n_e", "n_s", "p99"].iter().map(|s| s.to_string()).collect();
    header.extend(result.systems.iter().map(|s| s.short_name().to_string()));
    let mut rows = Vec::new();
    for l in &result.labels {
        let mut row = vec![
            l.label.clone(),
            l.n_e.to_string(),
            l.n_s.to_string(),
            format_score(l.p99.get(metric)),
        ];
        for s in &result.systems {
            row.push(format_score(l.systems.get(s).and_then(|r| r.report.get(metric))));
        }
        rows.push(row);
    }
    let avg = |name: &str, pick: &dyn Fn(System) -> Option<f64>| {
        let mut row = vec![
            name.to_string(),
            String::new(),
            String::new(),
            format_score(result.average_p99.get(metric)),
        ];
        row.extend(result.systems.iter().map(|&s| format_score(pick(s))));
        row
    };
    match metric {
        Metric::F1 => {
            rows.push(avg("average", &|s| result.averages(s).f1_zero_filled));
            rows.push(avg("average_defined_only", &|s| result.averages(s).f1_defined_only));
        }
        Metric::Ba => rows.push(avg("average", &|s| result.averages(s).ba)),
        _ => rows.push(avg("average", &|s| {
            let vals: Vec<f64> = result
                .labels
                .iter()
                .filter_map(|l| l.systems.get(&s).and_then(|r| r.report.get(metric)))
                .collect();
            (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
        })),
    }
    Table { header, rows }
}

/// Raw counts per label and system, with the folds that used a trivial model.
pub fn counts_table(result: &CvResult) -> Table {
    let header = ["label", "system", "tp", "tn", "fp", "fn", "f1_defined", "trivial_folds"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let mut rows = Vec::new();
    for l in &result.labels {
        for (s, r) in &l.systems {
            rows.push(vec![
                l.label.clone(),
                s.short_name().to_string(),
                r.counts.tp.to_string(),
                r.counts.tn.to_string(),
                r.counts.fp.to_string(),
                r.counts.fn_.to_string(),
                r.report.f1_defined.to_string(),
                r.trivial_folds.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(" "),
            ]);
        }
    }
    Table { header, rows }
}

/// Learned second-layer weights per label, averaged over folds.
pub fn lfl_weights_table(result: &CvResult) -> Table {
    let mut header = vec!["label".to_string()];
    header.extend(crate::sensor::Sensor::ALL.iter().map(|s| s.short_name().to_string()));
    let rows = result
        .labels
        .iter()
        .filter_map(|l| {
            let w = l.lfl_weights.as_ref()?;
            let mut row = vec![l.label.clone()];
            row.extend(w.iter().map(|v| format!("{v:.4}")));
            Some(row)
        })
        .collect();
    Table { header, rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_and_markdown_alignment() {
        let t = Table {
            header: vec!["a".into(), "b".into()],
            rows: vec![vec!["x,y".into(), "1".into()]],
        };
        assert_eq!(t.to_csv(), "a,b\n\"x,y\",1\n");
        let md = t.to_markdown();
        assert_eq!(md.lines().count(), 3);
        assert!(md.starts_with("| a   | b   |"));
    }
}
