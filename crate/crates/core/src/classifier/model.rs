use super::grid::{select_cost, CostSelection};
use super::logistic::{train_linear, ClassWeighting, LinearModel};
use super::standardize::Standardizer;
use super::{ClassifierError, Matrix};
use crate::sensor::{Example, FeatureVector, Sensor};

/// How the cost parameter is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostPolicy {
    /// Grid search on a stratified validation split drawn with `seed`.
    Grid { seed: u64 },
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    pub cost: CostPolicy,
    pub weighting: ClassWeighting,
}

impl TrainOptions {
    pub fn grid(seed: u64) -> Self {
        Self {
            cost: CostPolicy::Grid { seed },
            weighting: ClassWeighting::Balanced,
        }
    }

    pub fn fixed(cost: f64) -> Self {
        Self {
            cost: CostPolicy::Fixed(cost),
            weighting: ClassWeighting::Balanced,
        }
    }
}

/// Standardizer plus linear model, fit together on raw feature rows.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedLinear {
    pub standardizer: Standardizer,
    pub model: LinearModel,
    pub selection: CostSelection,
    /// The training labels had a single class; the model outputs 0.5 everywhere.
    pub trivial: bool,
}

impl FittedLinear {
    pub fn probability(&self, raw_row: &[f64]) -> Result<f64, ClassifierError> {
        let x = self.standardizer.transform_row(raw_row)?;
        Ok(self.model.probability(&x))
    }
}

/// Standardize, choose the cost, then train on all rows. A single-class
/// label yields a trivial model instead of an error.
pub fn fit_pipeline(
    x_raw: &Matrix,
    y: &[bool],
    options: &TrainOptions,
) -> Result<FittedLinear, ClassifierError> {
    if x_raw.rows() != y.len() {
        return Err(ClassifierError::DimensionMismatch {
            expected: x_raw.rows(),
            got: y.len(),
        });
    }
    let standardizer = Standardizer::fit(x_raw)?;
    let pos = y.iter().filter(|&&v| v).count();
    if pos == 0 || pos == y.len() {
        let cost = match options.cost {
            CostPolicy::Fixed(c) => c,
            CostPolicy::Grid { .. } => super::grid::FALLBACK_COST,
        };
        return Ok(FittedLinear {
            standardizer,
            model: LinearModel::trivial(x_raw.cols(), cost),
            selection: CostSelection::fixed(cost),
            trivial: true,
        });
    }
    let x = standardizer.transform(x_raw)?;
    let selection = match options.cost {
        CostPolicy::Fixed(c) => CostSelection::fixed(c),
        CostPolicy::Grid { seed } => select_cost(&x, y, options.weighting, seed)?,
    };
    let model = train_linear(&x, y, selection.cost, options.weighting)?;
    Ok(FittedLinear {
        standardizer,
        model,
        selection,
        trivial: false,
    })
}

/// Concatenated feature values of `sensors` in order, or `None` if any is absent.
pub fn feature_row(example: &Example, sensors: &[Sensor]) -> Option<Vec<f64>> {
    let mut row = Vec::with_capacity(sensors.iter().map(|s| s.dim()).sum());
    for &s in sensors {
        row.extend_from_slice(example.feature(s)?.values());
    }
    Some(row)
}

/// Rows and binary targets from examples that carry every sensor and a
/// non-missing value for `label`.
pub fn training_matrix<'a>(
    examples: impl IntoIterator<Item = &'a Example>,
    label: &str,
    sensors: &[Sensor],
) -> (Matrix, Vec<bool>) {
    let dim = sensors.iter().map(|s| s.dim()).sum();
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for ex in examples {
        let Some(target) = ex.label(label).as_bool() else {
            continue;
        };
        if let Some(row) = feature_row(ex, sensors) {
            rows.push(row);
            y.push(target);
        }
    }
    (Matrix::from_rows(&rows, dim), y)
}

/// A binary classifier for one label over the concatenated features of one
/// or more sensors. With one sensor this is a single-sensor model; with all
/// six in canonical order it is the early-fusion model.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorModel {
    pub label: String,
    pub sensors: Vec<Sensor>,
    pub fitted: FittedLinear,
}

pub type SingleSensorModel = SensorModel;

impl SensorModel {
    pub fn dim(&self) -> usize {
        self.fitted.model.dim()
    }

    pub fn is_trivial(&self) -> bool {
        self.fitted.trivial
    }

    pub fn cost(&self) -> f64 {
        self.fitted.model.cost
    }

    /// `P(label | features)` for a raw concatenated feature row.
    pub fn predict_proba_row(&self, raw_row: &[f64]) -> Result<f64, ClassifierError> {
        self.fitted.probability(raw_row)
    }

    /// Probability for a single sensor's feature vector.
    pub fn predict_proba(&self, features: &FeatureVector) -> Result<f64, ClassifierError> {
        if self.sensors != [features.sensor()] {
            return Err(ClassifierError::SensorMismatch {
                expected: self.sensors.clone(),
                got: features.sensor(),
            });
        }
        self.predict_proba_row(features.values())
    }

    /// Probability for an example; errors if a required sensor is absent.
    pub fn predict_example(&self, example: &Example) -> Result<f64, ClassifierError> {
        for &s in &self.sensors {
            if example.feature(s).is_none() {
                return Err(ClassifierError::MissingSensor(s));
            }
        }
        let row = feature_row(example, &self.sensors).expect("sensors checked above");
        self.predict_proba_row(&row)
    }
}

/// Binary decision rule: strictly above one half.
pub fn decide(probability: f64) -> bool {
    probability > 0.5
}

/// Trains a model for `label` on every example that has all `sensors` and a
/// known label value.
pub fn train_sensor_model<'a>(
    examples: impl IntoIterator<Item = &'a Example>,
    label: &str,
    sensors: &[Sensor],
    options: &TrainOptions,
) -> Result<SensorModel, ClassifierError> {
    let (x, y) = training_matrix(examples, label, sensors);
    if x.rows() < 2 {
        return Err(ClassifierError::NoTrainingExamples {
            label: label.to_string(),
            found: x.rows(),
        });
    }
    Ok(SensorModel {
        label: label.to_string(),
        sensors: sensors.to_vec(),
        fitted: fit_pipeline(&x, &y, options)?,
    })
}

pub fn train_single_sensor<'a>(
    examples: impl IntoIterator<Item = &'a Example>,
    label: &str,
    sensor: Sensor,
    options: &TrainOptions,
) -> Result<SingleSensorModel, ClassifierError> {
    train_sensor_model(examples, label, &[sensor], options)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor::LabelValue;

    fn ps_example(t: i64, first: f64, label: Option<bool>) -> Example {
        let mut v = vec![0.0; 34];
        v[0] = first;
        v[1] = t as f64 * 0.01;
        let ex = Example::new("u", t).with_features(FeatureVector::from_optional(Sensor::Ps, v).unwrap());
        match label {
            Some(b) => ex.with_label("X", LabelValue::from_bool(b)),
            None => ex,
        }
    }

    #[test]
    fn tie_probability_is_negative() {
        assert!(!decide(0.5));
        let m = SensorModel {
            label: "X".into(),
            sensors: vec![Sensor::Ps],
            fitted: FittedLinear {
                standardizer: Standardizer::identity(34),
                model: LinearModel::trivial(34, 1.0),
                selection: CostSelection::fixed(1.0),
                trivial: true,
            },
        };
        let fv = FeatureVector::from_optional(Sensor::Ps, vec![1.0; 34]).unwrap();
        assert_eq!(m.predict_proba(&fv).unwrap(), 0.5);
        let wrong = FeatureVector::from_optional(Sensor::Loc, vec![1.0; 17]).unwrap();
        assert!(matches!(m.predict_proba(&wrong), Err(ClassifierError::SensorMismatch { .. })));
        assert!(matches!(
            m.predict_proba_row(&[0.0; 3]),
            Err(ClassifierError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn missing_labels_and_sensors_are_skipped() {
        let mut exs: Vec<Example> = (0..12).map(|t| ps_example(t, (t % 2) as f64, Some(t % 2 == 1))).collect();
        exs.push(ps_example(20, 1.0, None));
        exs.push(Example::new("u", 21).with_label("X", LabelValue::Relevant));
        let (x, y) = training_matrix(&exs, "X", &[Sensor::Ps]);
        assert_eq!(x.rows(), 12);
        assert_eq!(y.len(), 12);
        let m = train_single_sensor(&exs, "X", Sensor::Ps, &TrainOptions::grid(1)).unwrap();
        assert!(!m.is_trivial());
        assert!(decide(m.predict_example(&exs[1]).unwrap()));
        assert!(!decide(m.predict_example(&exs[0]).unwrap()));
        assert!(matches!(
            m.predict_example(&exs[13]),
            Err(ClassifierError::MissingSensor(Sensor::Ps))
        ));
    }

    #[test]
    fn single_class_gives_trivial_model() {
        let exs: Vec<Example> = (0..5).map(|t| ps_example(t, t as f64, Some(false))).collect();
        let m = train_single_sensor(&exs, "X", Sensor::Ps, &TrainOptions::grid(1)).unwrap();
        assert!(m.is_trivial());
        assert_eq!(m.predict_example(&exs[2]).unwrap(), 0.5);
    }
}
