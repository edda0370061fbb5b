use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::baseline::{random_baseline_p99, random_baseline_p99_average, BaselineP99, DEFAULT_SIMULATIONS};
use super::folds::FoldPartition;
use super::metrics::{average_reports, compute_metrics, AverageReport, MetricCounts, MetricReport};
use super::EvaluationError;
use crate::classifier::{FittedLinear, LinearModel, SensorModel, Standardizer, TrainOptions};
use crate::classifier::grid::CostSelection;
use crate::fusion::{
    early_fusion, late_fusion_learned, train_or_trivial, trivial_model, FusionError, FusionModel,
    FusionVariant,
};
use crate::sensor::{Dataset, Example, Sensor};

/// A recognition system: one single-sensor classifier or a fusion scheme
/// over the six core sensors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum System {
    Single(Sensor),
    Fusion(FusionVariant),
}

impl System {
    pub const ALL: [System; 9] = [
        System::Single(Sensor::Acc),
        System::Single(Sensor::Gyro),
        System::Single(Sensor::WAcc),
        System::Single(Sensor::Loc),
        System::Single(Sensor::Aud),
        System::Single(Sensor::Ps),
        System::Fusion(FusionVariant::Early),
        System::Fusion(FusionVariant::LateAverage),
        System::Fusion(FusionVariant::LateLearned),
    ];

    pub fn short_name(self) -> &'static str {
        match self {
            System::Single(s) => s.short_name(),
            System::Fusion(v) => v.short_name(),
        }
    }
}

impl fmt::Display for System {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            System::Single(s) => write!(f, "{}", s.display_name()),
            System::Fusion(v) => f.write_str(&v.short_name().to_ascii_uppercase()),
        }
    }
}

impl FromStr for System {
    type Err = EvaluationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let lower = s.trim().to_ascii_lowercase();
        System::ALL
            .into_iter()
            .find(|sys| sys.short_name() == lower)
            .ok_or_else(|| EvaluationError::UnknownSystem(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvOptions {
    pub train: TrainOptions,
    /// Seed of the random-baseline simulations.
    pub baseline_seed: u64,
    pub simulations: usize,
}

impl CvOptions {
    pub fn new(train: TrainOptions, baseline_seed: u64) -> Self {
        Self {
            train,
            baseline_seed,
            simulations: DEFAULT_SIMULATIONS,
        }
    }
}

/// Cost chosen for one trained model.
#[derive(Debug, Clone, PartialEq)]
pub struct CostRecord {
    pub label: String,
    pub fold: usize,
    /// Sensor short name, `ef`, or `lfl` for the second layer.
    pub model: String,
    pub cost: f64,
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemResult {
    pub counts: MetricCounts,
    pub report: MetricReport,
    /// Folds whose model was trivial because the label had a single class
    /// (or no usable examples) in training.
    pub trivial_folds: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabelResult {
    pub label: String,
    /// Positive examples in the evaluated subset.
    pub n_e: u64,
    /// Users with at least one evaluated positive example.
    pub n_s: usize,
    /// Evaluated examples with a known label value.
    pub n_examples: u64,
    pub p99: BaselineP99,
    pub systems: BTreeMap<System, SystemResult>,
    /// Second-layer weights per sensor, averaged over folds.
    pub lfl_weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvResult {
    pub systems: Vec<System>,
    pub labels: Vec<LabelResult>,
    pub costs: Vec<CostRecord>,
    /// p99 of the label-averaged metrics.
    pub average_p99: BaselineP99,
}

impl CvResult {
    pub fn averages(&self, system: System) -> AverageReport {
        let reports: Vec<MetricReport> = self
            .labels
            .iter()
            .filter_map(|l| l.systems.get(&system).map(|r| r.report))
            .collect();
        average_reports(&reports)
    }

    pub fn label(&self, name: &str) -> Option<&LabelResult> {
        self.labels.iter().find(|l| l.label == name)
    }
}

/// Examples of a held-out fold that are evaluated for `label`: all six core
/// sensors present and a known label value.
pub fn evaluation_examples<'a>(examples: impl IntoIterator<Item = &'a Example>, label: &str) -> Vec<&'a Example> {
    examples
        .into_iter()
        .filter(|e| Sensor::ALL.iter().all(|&s| e.feature(s).is_some()))
        .filter(|e| e.label(label).as_bool().is_some())
        .collect()
}

struct FoldOutcome {
    counts: BTreeMap<System, MetricCounts>,
    trivial: BTreeSet<System>,
    costs: Vec<CostRecord>,
    lfl_weights: Option<Vec<f64>>,
}

fn cost_record(label: &str, fold: usize, model: &str, f: &FittedLinear) -> CostRecord {
    CostRecord {
        label: label.to_string(),
        fold,
        model: model.to_string(),
        cost: f.model.cost,
        fallback: f.selection.fallback,
    }
}

/// Learned late fusion whose second layer outputs 0.5 everywhere.
fn trivial_learned(label: &str, components: Vec<SensorModel>, cost: f64) -> FusionModel {
    let n = components.len();
    FusionModel {
        variant: FusionVariant::LateLearned,
        label: label.to_string(),
        components,
        second_layer: Some(FittedLinear {
            standardizer: Standardizer::identity(n),
            model: LinearModel::trivial(n, cost),
            selection: CostSelection::fixed(cost),
            trivial: true,
        }),
    }
}

/// Trains every requested system on `train` and returns the models, the
/// trivial flags and chosen costs. Shared by cross-validation and
/// personalization.
pub fn train_systems(
    train: &[&Example],
    label: &str,
    systems: &[System],
    options: &TrainOptions,
    fold: usize,
) -> Result<TrainedSystems, EvaluationError> {
    let needs_late = systems
        .iter()
        .any(|s| matches!(s, System::Fusion(FusionVariant::LateAverage | FusionVariant::LateLearned)));
    let mut sensors: BTreeSet<Sensor> = systems
        .iter()
        .filter_map(|s| match s {
            System::Single(x) => Some(*x),
            _ => None,
        })
        .collect();
    if needs_late {
        sensors.extend(Sensor::ALL);
    }
    let sensor_list: Vec<Sensor> = sensors.into_iter().collect();
    let trained: Vec<SensorModel> = sensor_list
        .par_iter()
        .map(|&s| train_or_trivial(train, label, &[s], options))
        .collect::<Result<_, _>>()?;
    let components: BTreeMap<Sensor, SensorModel> = sensor_list.into_iter().zip(trained).collect();
    let mut costs: Vec<CostRecord> = components
        .iter()
        .map(|(s, m)| cost_record(label, fold, s.short_name(), &m.fitted))
        .collect();
    let fallback_cost = match options.cost {
        crate::classifier::CostPolicy::Fixed(c) => c,
        crate::classifier::CostPolicy::Grid { .. } => crate::classifier::FALLBACK_COST,
    };
    let six = || -> Vec<SensorModel> { Sensor::ALL.iter().map(|s| components[s].clone()).collect() };
    let mut models = BTreeMap::new();
    for &sys in systems {
        let model = match sys {
            System::Single(s) => FusionModel {
                variant: FusionVariant::LateAverage,
                label: label.to_string(),
                components: vec![components[&s].clone()],
                second_layer: None,
            },
            System::Fusion(FusionVariant::Early) => match early_fusion(train, label, &Sensor::ALL, options) {
                Ok(m) => {
                    costs.push(cost_record(label, fold, "ef", &m.components[0].fitted));
                    m
                }
                Err(FusionError::NoCompleteExamples { .. }) => FusionModel {
                    variant: FusionVariant::Early,
                    label: label.to_string(),
                    components: vec![trivial_model(label, &Sensor::ALL, fallback_cost)],
                    second_layer: None,
                },
                Err(e) => return Err(e.into()),
            },
            System::Fusion(FusionVariant::LateAverage) => FusionModel {
                variant: FusionVariant::LateAverage,
                label: label.to_string(),
                components: six(),
                second_layer: None,
            },
            System::Fusion(FusionVariant::LateLearned) => match late_fusion_learned(train, label, six(), options) {
                Ok(m) => {
                    costs.push(cost_record(label, fold, "lfl", m.second_layer.as_ref().expect("learned layer")));
                    m
                }
                Err(FusionError::NoCompleteExamples { .. } | FusionError::DegenerateInputs) => {
                    trivial_learned(label, six(), fallback_cost)
                }
                Err(e) => return Err(e.into()),
            },
        };
        models.insert(sys, model);
    }
    Ok(TrainedSystems { models, costs })
}

/// Models per system plus the costs chosen while training them.
pub struct TrainedSystems {
    pub models: BTreeMap<System, FusionModel>,
    pub costs: Vec<CostRecord>,
}

/// A model decides trivially: every component (or the learned layer) has a single-class fit.
pub fn is_trivial(model: &FusionModel) -> bool {
    match &model.second_layer {
        Some(layer) => layer.trivial,
        None => model.is_trivial(),
    }
}

fn run_fold(
    dataset: &Dataset,
    label: &str,
    systems: &[System],
    partition: &FoldPartition,
    fold: usize,
    options: &TrainOptions,
) -> Result<FoldOutcome, EvaluationError> {
    let test_users: BTreeSet<&str> = partition.folds[fold].iter().map(String::as_str).collect();
    let train: Vec<&Example> = dataset
        .examples()
        .filter(|e| !test_users.contains(e.user_id.as_str()))
        .collect();
    let test = evaluation_examples(
        test_users.iter().flat_map(|u| dataset.user_examples(u)),
        label,
    );
    let mut counts: BTreeMap<System, MetricCounts> = systems.iter().map(|&s| (s, MetricCounts::default())).collect();
    if test.is_empty() {
        return Ok(FoldOutcome {
            counts,
            trivial: BTreeSet::new(),
            costs: Vec::new(),
            lfl_weights: None,
        });
    }
    let trained = train_systems(&train, label, systems, options, fold)?;
    let mut trivial = BTreeSet::new();
    let mut lfl_weights = None;
    for (&sys, model) in &trained.models {
        if is_trivial(model) {
            trivial.insert(sys);
        }
        if sys == System::Fusion(FusionVariant::LateLearned) {
            lfl_weights = model.learned_weights().map(|w| w.into_iter().map(|(_, v)| v).collect());
        }
        let c = counts.get_mut(&sys).expect("system requested");
        for ex in &test {
            let p = model.predict(ex)?;
            c.record(ex.label(label) == crate::sensor::LabelValue::Relevant, p > 0.5);
        }
    }
    Ok(FoldOutcome {
        counts,
        trivial,
        costs: trained.costs,
        lfl_weights,
    })
}

/// Subject-partitioned cross-validation. For each fold the systems train on
/// the other folds' users and predict the held-out users' examples that have
/// all six core sensors. Counts are summed over folds before any metric is
/// computed. Examples with a missing label value are excluded from both
/// training and evaluation of that label.
pub fn cross_validate(
    dataset: &Dataset,
    labels: &[String],
    systems: &[System],
    partition: &FoldPartition,
    options: &CvOptions,
) -> Result<CvResult, EvaluationError> {
    partition.check_covers(dataset.user_ids())?;
    let jobs: Vec<(usize, usize)> = (0..labels.len())
        .flat_map(|l| (0..partition.k()).map(move |f| (l, f)))
        .collect();
    let outcomes: Vec<FoldOutcome> = jobs
        .par_iter()
        .map(|&(l, f)| run_fold(dataset, &labels[l], systems, partition, f, &options.train))
        .collect::<Result<_, _>>()?;
    let mut results = Vec::with_capacity(labels.len());
    let mut costs = Vec::new();
    let mut outcomes = outcomes.into_iter();
    for (li, label) in labels.iter().enumerate() {
        let evaluated = evaluation_examples(dataset.examples(), label);
        let n_examples = evaluated.len() as u64;
        let positives: Vec<&&Example> = evaluated
            .iter()
            .filter(|e| e.label(label) == crate::sensor::LabelValue::Relevant)
            .collect();
        let n_e = positives.len() as u64;
        let n_s = positives.iter().map(|e| e.user_id.as_str()).collect::<BTreeSet<_>>().len();
        let mut per_system: BTreeMap<System, (MetricCounts, Vec<usize>)> = BTreeMap::new();
        let mut weight_sum: Option<(Vec<f64>, usize)> = None;
        for f in 0..partition.k() {
            let o = outcomes.next().expect("one outcome per job");
            for (sys, c) in o.counts {
                let e = per_system.entry(sys).or_default();
                e.0 += c;
                if o.trivial.contains(&sys) {
                    e.1.push(f);
                }
            }
            if let Some(w) = o.lfl_weights {
                let entry = weight_sum.get_or_insert_with(|| (vec![0.0; w.len()], 0));
                for (a, b) in entry.0.iter_mut().zip(&w) {
                    *a += b;
                }
                entry.1 += 1;
            }
            costs.extend(o.costs);
        }
        let label_seed = options.baseline_seed.wrapping_add(li as u64);
        let p99 = if n_examples > 0 {
            random_baseline_p99(n_e, n_examples, options.simulations, label_seed)
        } else {
            BaselineP99 { values: Vec::new() }
        };
        results.push(LabelResult {
            label: label.clone(),
            n_e,
            n_s,
            n_examples,
            p99,
            systems: per_system
                .into_iter()
                .map(|(s, (counts, trivial_folds))| {
                    (
                        s,
                        SystemResult {
                            counts,
                            report: compute_metrics(&counts),
                            trivial_folds,
                        },
                    )
                })
                .collect(),
            lfl_weights: weight_sum.map(|(w, n)| w.into_iter().map(|v| v / n as f64).collect()),
        });
    }
    let average_p99 = random_baseline_p99_average(
        &results
            .iter()
            .filter(|r| r.n_examples > 0)
            .map(|r| (r.n_e, r.n_examples))
            .collect::<Vec<_>>(),
        options.simulations,
        options.baseline_seed,
    );
    Ok(CvResult {
        systems: systems.to_vec(),
        labels: results,
        costs,
        average_p99,
    })
}
