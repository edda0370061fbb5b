use std::ops::{Add, AddAssign};

/// Confusion counts of a binary classifier.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct MetricCounts {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl MetricCounts {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        Self { tp, tn, fp, fn_ }
    }

    pub fn record(&mut self, truth: bool, predicted: bool) {
        match (truth, predicted) {
            (true, true) => self.tp += 1,
            (false, false) => self.tn += 1,
            (false, true) => self.fp += 1,
            (true, false) => self.fn_ += 1,
        }
    }

    pub fn from_predictions(truth: &[bool], predicted: &[bool]) -> Self {
        assert_eq!(truth.len(), predicted.len());
        let mut c = Self::default();
        for (&t, &p) in truth.iter().zip(predicted) {
            c.record(t, p);
        }
        c
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }

    pub fn negatives(&self) -> u64 {
        self.tn + self.fp
    }
}

impl Add for MetricCounts {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self::new(self.tp + o.tp, self.tn + o.tn, self.fp + o.fp, self.fn_ + o.fn_)
    }
}

impl AddAssign for MetricCounts {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl std::iter::Sum for MetricCounts {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::default(), |a, b| a + b)
    }
}

/// The six metrics computed from summed counts. Undefined ratios are `None`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricReport {
    pub accuracy: Option<f64>,
    /// Recall / sensitivity.
    pub tpr: Option<f64>,
    /// Specificity.
    pub tnr: Option<f64>,
    pub precision: Option<f64>,
    pub ba: Option<f64>,
    /// `2TP / (2TP + FP + FN)`, or 0 when there are no positive decisions
    /// and no positives.
    pub f1: f64,
    /// False when precision or recall is undefined.
    pub f1_defined: bool,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

pub fn compute_metrics(c: &MetricCounts) -> MetricReport {
    let tpr = ratio(c.tp, c.tp + c.fn_);
    let tnr = ratio(c.tn, c.tn + c.fp);
    let precision = ratio(c.tp, c.tp + c.fp);
    let ba = match (tpr, tnr) {
        (Some(a), Some(b)) => Some((a + b) / 2.0),
        _ => None,
    };
    let den = 2 * c.tp + c.fp + c.fn_;
    let f1 = if den == 0 { 0.0 } else { 2.0 * c.tp as f64 / den as f64 };
    MetricReport {
        accuracy: ratio(c.tp + c.tn, c.total()),
        tpr,
        tnr,
        precision,
        ba,
        f1,
        f1_defined: tpr.is_some() && precision.is_some(),
    }
}

/// Which metric a table or average refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Accuracy,
    Tpr,
    Tnr,
    Precision,
    Ba,
    F1,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Accuracy,
        Metric::Tpr,
        Metric::Tnr,
        Metric::Precision,
        Metric::Ba,
        Metric::F1,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Tpr => "tpr",
            Metric::Tnr => "tnr",
            Metric::Precision => "precision",
            Metric::Ba => "ba",
            Metric::F1 => "f1",
        }
    }
}

impl MetricReport {
    /// Metric value; F1 reports its zero-filled value even when undefined.
    pub fn get(&self, m: Metric) -> Option<f64> {
        match m {
            Metric::Accuracy => self.accuracy,
            Metric::Tpr => self.tpr,
            Metric::Tnr => self.tnr,
            Metric::Precision => self.precision,
            Metric::Ba => self.ba,
            Metric::F1 => Some(self.f1),
        }
    }
}

/// Label averages of one system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AverageReport {
    /// Mean BA over labels with a defined BA.
    pub ba: Option<f64>,
    /// Mean F1 counting undefined values as 0.
    pub f1_zero_filled: Option<f64>,
    /// Mean F1 over labels where it is defined.
    pub f1_defined_only: Option<f64>,
    pub accuracy: Option<f64>,
    pub labels: usize,
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| s / n as f64)
}

pub fn average_reports(reports: &[MetricReport]) -> AverageReport {
    AverageReport {
        ba: mean_of(reports.iter().filter_map(|r| r.ba)),
        f1_zero_filled: mean_of(reports.iter().map(|r| r.f1)),
        f1_defined_only: mean_of(reports.iter().filter(|r| r.f1_defined).map(|r| r.f1)),
        accuracy: mean_of(reports.iter().filter_map(|r| r.accuracy)),
        labels: reports.len(),
    }
}
