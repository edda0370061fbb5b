use super::EvaluationError;

/// Confusion counts with rows normalized per true class.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    /// `counts[i][j]`: examples of class `i` predicted as `j`.
    pub counts: Vec<Vec<u64>>,
    /// Row-normalized fractions; `None` for classes with no examples.
    pub normalized: Vec<Option<Vec<f64>>>,
}

pub fn confusion_matrix(
    truth: &[usize],
    predicted: &[usize],
    classes: &[String],
) -> Result<ConfusionMatrix, EvaluationError> {
    if truth.len() != predicted.len() {
        return Err(EvaluationError::LengthMismatch {
            truth: truth.len(),
            predicted: predicted.len(),
        });
    }
    let k = classes.len();
    let mut counts = vec![vec![0u64; k]; k];
    for (&t, &p) in truth.iter().zip(predicted) {
        if t >= k || p >= k {
            return Err(EvaluationError::ClassIndex(t.max(p)));
        }
        counts[t][p] += 1;
    }
    let normalized = counts
        .iter()
        .map(|row| {
            let n: u64 = row.iter().sum();
            (n > 0).then(|| row.iter().map(|&c| c as f64 / n as f64).collect())
        })
        .collect();
    Ok(ConfusionMatrix {
        classes: classes.to_vec(),
        counts,
        normalized,
    })
}

impl ConfusionMatrix {
    /// CSV with a `truth` column then one column per predicted class; empty
    /// rows have empty cells.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("truth");
        for c in &self.classes {
            s.push(',');
            s.push_str(c);
        }
        s.push('\n');
        for (c, row) in self.classes.iter().zip(&self.normalized) {
            s.push_str(c);
            for j in 0..self.classes.len() {
                s.push(',');
                if let Some(r) = row {
                    s.push_str(&format!("{:.4}", r[j]));
                }
            }
            s.push('\n');
        }
        s
    }
}
