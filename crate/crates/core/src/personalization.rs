//! Universal, individual and adapted models for one test user.
//!
//! The user's examples are split by timestamp into an adaptation half and a
//! deployment half. The universal early-fusion model is trained on other
//! users, the individual one on the adaptation half, and the adapted model
//! averages the two probabilities. All three are scored on the deployment half.

use std::collections::BTreeSet;

use rayon::prelude::*;
use thiserror::Error;

use crate::classifier::{ClassifierError, TrainOptions};
use crate::evaluation::cv::evaluation_examples;
use crate::evaluation::metrics::{average_reports, compute_metrics, AverageReport, MetricCounts, MetricReport};
use crate::evaluation::FoldPartition;
use crate::fusion::{early_fusion, trivial_model, FusionError, FusionModel, FusionVariant};
use crate::sensor::{Dataset, Example, ExampleId, LabelValue, Sensor};

/// Labels with more user positive examples than this form the second average.
pub const MANY_EXAMPLES_THRESHOLD: usize = 300;

#[derive(Debug, Error)]
pub enum PersonalizationError {
    #[error("user {0} not found")]
    UnknownUser(String),
    #[error("user {user} has {found} examples, at least 2 are needed")]
    TooFewExamples { user: String, found: usize },
    #[error("train/test overlap: {0} deployment examples were used for training")]
    Leakage(usize),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersonalizationSplit<'a> {
    pub user_id: String,
    pub adaptation: Vec<&'a Example>,
    pub deployment: Vec<&'a Example>,
}

/// Stable sort by timestamp; the first `⌈n/2⌉` examples adapt, the rest deploy.
pub fn split_user_timeline<'a>(examples: &[&'a Example]) -> Result<PersonalizationSplit<'a>, PersonalizationError> {
    let user_id = examples.first().map(|e| e.user_id.clone()).unwrap_or_default();
    if examples.len() < 2 {
        return Err(PersonalizationError::TooFewExamples {
            user: user_id,
            found: examples.len(),
        });
    }
    let mut sorted = examples.to_vec();
    sorted.sort_by_key(|e| e.timestamp);
    let half = sorted.len().div_ceil(2);
    let deployment = sorted.split_off(half);
    Ok(PersonalizationSplit {
        user_id,
        adaptation: sorted,
        deployment,
    })
}

/// Scores of one label on the deployment half.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelComparison {
    pub label: String,
    /// Positive examples of the user over both halves.
    pub user_positives: usize,
    pub adaptation_positives: usize,
    pub universal: MetricReport,
    pub individual: MetricReport,
    pub adapted: MetricReport,
    pub individual_trivial: bool,
    /// `(universal, individual, adapted)` probability per deployment example.
    pub probabilities: Vec<(ExampleId, f64, f64, f64)>,
}

/// Chance-level report for a label whose individual model could not be trained.
pub fn chance_report(counts: &MetricCounts) -> MetricReport {
    let mut r = compute_metrics(counts);
    r.ba = Some(0.5);
    r.f1 = 0.0;
    r.f1_defined = false;
    r
}

/// Compares the three models for one label. `universal` must come from
/// training data that excludes the user.
pub fn evaluate_personalization(
    universal: &FusionModel,
    split: &PersonalizationSplit<'_>,
    label: &str,
    options: &TrainOptions,
) -> Result<(LabelComparison, FusionModel), PersonalizationError> {
    let individual = train_individual(&split.adaptation, label, options)?;
    let individual_trivial = individual.is_trivial();
    let deploy = evaluation_examples(split.deployment.iter().copied(), label);
    let (mut cu, mut ci, mut ca) = (MetricCounts::default(), MetricCounts::default(), MetricCounts::default());
    let mut probabilities = Vec::with_capacity(deploy.len());
    for ex in deploy {
        let truth = ex.label(label) == LabelValue::Relevant;
        let pu = universal.predict(ex)?;
        let pi = individual.predict(ex)?;
        let pa = (pu + pi) / 2.0;
        cu.record(truth, pu > 0.5);
        ci.record(truth, pi > 0.5);
        ca.record(truth, pa > 0.5);
        probabilities.push((ex.id(), pu, pi, pa));
    }
    let count = |xs: &[&Example]| xs.iter().filter(|e| e.label(label) == LabelValue::Relevant).count();
    let comparison = LabelComparison {
        label: label.to_string(),
        user_positives: count(&split.adaptation) + count(&split.deployment),
        adaptation_positives: count(&split.adaptation),
        universal: compute_metrics(&cu),
        individual: if individual_trivial { chance_report(&ci) } else { compute_metrics(&ci) },
        adapted: compute_metrics(&ca),
        individual_trivial,
        probabilities,
    };
    Ok((comparison, individual))
}

/// Early fusion on the adaptation half; trivial when it has no complete
/// examples or a single class.
pub fn train_individual(adaptation: &[&Example], label: &str, options: &TrainOptions) -> Result<FusionModel, PersonalizationError> {
    match early_fusion(adaptation, label, &Sensor::ALL, options) {
        Ok(m) => Ok(m),
        Err(FusionError::NoCompleteExamples { .. }) => Ok(FusionModel {
            variant: FusionVariant::Early,
            label: label.to_string(),
            components: vec![trivial_model(label, &Sensor::ALL, crate::classifier::FALLBACK_COST)],
            second_layer: None,
        }),
        Err(e) => Err(e.into()),
    }
}

/// Identities used for training and testing, for the leakage check.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LeakageAudit {
    pub universal_train: BTreeSet<ExampleId>,
    pub individual_train: BTreeSet<ExampleId>,
    pub deployment: BTreeSet<ExampleId>,
}

impl LeakageAudit {
    /// Deployment examples that also appear in a training set.
    pub fn overlap(&self) -> usize {
        self.deployment
            .iter()
            .filter(|id| self.universal_train.contains(id) || self.individual_train.contains(id))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PersonalizationReport {
    pub user_id: String,
    pub labels: Vec<LabelComparison>,
    pub audit: LeakageAudit,
}

/// `(universal, individual, adapted)` label averages.
pub type ThreeWayAverage = (AverageReport, AverageReport, AverageReport);

impl PersonalizationReport {
    fn average_over(&self, keep: impl Fn(&LabelComparison) -> bool) -> ThreeWayAverage {
        let kept: Vec<&LabelComparison> = self.labels.iter().filter(|l| keep(l)).collect();
        let pick = |f: fn(&LabelComparison) -> MetricReport| -> AverageReport {
            average_reports(&kept.iter().map(|l| f(l)).collect::<Vec<_>>())
        };
        (pick(|l| l.universal), pick(|l| l.individual), pick(|l| l.adapted))
    }

    /// Averages over every evaluated label.
    pub fn average_all(&self) -> ThreeWayAverage {
        self.average_over(|_| true)
    }

    /// Averages over labels with more than 300 user positive examples.
    pub fn average_many(&self) -> ThreeWayAverage {
        self.average_over(|l| l.user_positives > MANY_EXAMPLES_THRESHOLD)
    }
}

/// Runs the experiment for one user. With a partition, the universal model
/// trains on the users outside the user's fold; otherwise on all other users.
pub fn run_personalization(
    dataset: &Dataset,
    user: &str,
    labels: &[String],
    partition: Option<&FoldPartition>,
    options: &TrainOptions,
) -> Result<PersonalizationReport, PersonalizationError> {
    let own: Vec<&Example> = dataset.user_examples(user).iter().collect();
    if own.is_empty() {
        return Err(PersonalizationError::UnknownUser(user.to_string()));
    }
    let split = split_user_timeline(&own)?;
    let excluded: BTreeSet<&str> = match partition.and_then(|p| p.fold_of(user).map(|f| &p.folds[f])) {
        Some(fold) => fold.iter().map(String::as_str).collect(),
        None => [user].into_iter().collect(),
    };
    let universal_train: Vec<&Example> = dataset
        .examples()
        .filter(|e| !excluded.contains(e.user_id.as_str()))
        .collect();
    let audit = LeakageAudit {
        universal_train: universal_train.iter().map(|e| e.id()).collect(),
        individual_train: split.adaptation.iter().map(|e| e.id()).collect(),
        deployment: split.deployment.iter().map(|e| e.id()).collect(),
    };
    let leaked = audit.overlap();
    if leaked > 0 {
        return Err(PersonalizationError::Leakage(leaked));
    }
    let comparisons = labels
        .par_iter()
        .map(|label| {
            let universal = match early_fusion(&universal_train, label, &Sensor::ALL, options) {
                Ok(m) => m,
                Err(FusionError::NoCompleteExamples { .. }) => FusionModel {
                    variant: FusionVariant::Early,
                    label: label.clone(),
                    components: vec![trivial_model(label, &Sensor::ALL, crate::classifier::FALLBACK_COST)],
                    second_layer: None,
                },
                Err(e) => return Err(e.into()),
            };
            evaluate_personalization(&universal, &split, label, options).map(|(c, _)| c)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(PersonalizationReport {
        user_id: user.to_string(),
        labels: comparisons,
        audit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exs(ts: &[i64]) -> Vec<Example> {
        ts.iter().map(|&t| Example::new("u", t)).collect()
    }

    #[test]
    fn even_and_odd_splits() {
        let e = exs(&[1, 2, 3, 4]);
        let refs: Vec<&Example> = e.iter().collect();
        let s = split_user_timeline(&refs).unwrap();
        let ts = |v: &[&Example]| v.iter().map(|e| e.timestamp).collect::<Vec<_>>();
        assert_eq!(ts(&s.adaptation), vec![1, 2]);
        assert_eq!(ts(&s.deployment), vec![3, 4]);
        let e = exs(&[5, 1, 4, 2, 3]);
        let refs: Vec<&Example> = e.iter().collect();
        let s = split_user_timeline(&refs).unwrap();
        assert_eq!(ts(&s.adaptation), vec![1, 2, 3]);
        assert_eq!(ts(&s.deployment), vec![4, 5]);
    }

    #[test]
    fn one_example_is_rejected() {
        let e = exs(&[1]);
        let refs: Vec<&Example> = e.iter().collect();
        assert!(matches!(
            split_user_timeline(&refs),
            Err(PersonalizationError::TooFewExamples { .. })
        ));
    }

    #[test]
    fn chance_report_overrides_scores() {
        let r = chance_report(&MetricCounts::new(0, 10, 0, 0));
        assert_eq!(r.ba, Some(0.5));
        assert_eq!(r.f1, 0.0);
    }
}
