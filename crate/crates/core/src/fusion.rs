//! Sensor fusion: early fusion over the concatenated features, late fusion by
//! averaging per-sensor probabilities, and late fusion through a learned
//! second-layer logistic regression. Also the one-vs-rest multiclass model.

use std::io::{BufRead, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::classifier::serialize::{read_model_from, write_model, LineReader, FORMAT_VERSION};
use crate::classifier::{
    fit_pipeline, grid::CostSelection, ClassifierError, CostPolicy, FittedLinear, LinearModel,
    Matrix, SensorModel, Standardizer, TrainOptions,
};
use crate::classifier::model::{feature_row, train_sensor_model};
use crate::sensor::{Example, Sensor};

pub const FUSION_HEADER: &str = "ctxrec-fusion";

#[derive(Debug, Error)]
pub enum FusionError {
    #[error(transparent)]
    Classifier(#[from] ClassifierError),
    #[error("label {label}: no training examples with all required sensors")]
    NoCompleteExamples { label: String },
    #[error("example lacks sensor {0}")]
    MissingSensor(Sensor),
    #[error("no sensor of the example is covered by the model")]
    NoSensors,
    #[error("degenerate inputs: every second-layer input is constant")]
    DegenerateInputs,
    #[error("class {0} has no examples")]
    EmptyClass(String),
    #[error("invalid fusion model: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FusionVariant {
    Early,
    LateAverage,
    LateLearned,
}

impl FusionVariant {
    pub fn short_name(self) -> &'static str {
        match self {
            FusionVariant::Early => "ef",
            FusionVariant::LateAverage => "lfa",
            FusionVariant::LateLearned => "lfl",
        }
    }

    pub fn from_short_name(s: &str) -> Option<Self> {
        match s {
            "ef" => Some(FusionVariant::Early),
            "lfa" => Some(FusionVariant::LateAverage),
            "lfl" => Some(FusionVariant::LateLearned),
            _ => None,
        }
    }
}

/// How late fusion treats an example missing some sensors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strictness {
    /// Every component sensor must be present.
    #[default]
    Strict,
    /// Average over the sensors that are present.
    Lenient,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FusedPrediction {
    pub probability: f64,
    pub decision: bool,
    /// Lenient averaging skipped at least one sensor.
    pub partial: bool,
}

/// A trained fusion system for one label.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionModel {
    pub variant: FusionVariant,
    pub label: String,
    /// Early fusion: one model over all sensors. Late fusion: one model per sensor.
    pub components: Vec<SensorModel>,
    /// Second layer of learned late fusion, over raw component probabilities.
    pub second_layer: Option<FittedLinear>,
}

/// Arithmetic mean; the late-fusion-average combination rule.
pub fn average_probabilities(probabilities: &[f64]) -> f64 {
    if probabilities.is_empty() {
        return f64::NAN;
    }
    let mean = probabilities.iter().sum::<f64>() / probabilities.len() as f64;
    // rounding can push the mean of equal inputs just past them
    let (lo, hi) = probabilities
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &p| (lo.min(p), hi.max(p)));
    mean.clamp(lo, hi)
}

/// Averages the component probabilities for one example.
pub fn late_fusion_average(
    models: &[SensorModel],
    example: &Example,
    strictness: Strictness,
) -> Result<FusedPrediction, FusionError> {
    let mut probs = Vec::with_capacity(models.len());
    for m in models {
        match m.predict_example(example) {
            Ok(p) => probs.push(p),
            Err(ClassifierError::MissingSensor(s)) => {
                if strictness == Strictness::Strict {
                    return Err(FusionError::MissingSensor(s));
                }
            }
            Err(e) => return Err(e.into()),
        }
    }
    if probs.is_empty() {
        return Err(FusionError::NoSensors);
    }
    let p = average_probabilities(&probs);
    Ok(FusedPrediction {
        probability: p,
        decision: p > 0.5,
        partial: probs.len() < models.len(),
    })
}

/// Examples that carry every sensor in `sensors`.
pub fn complete_examples<'a>(examples: &[&'a Example], sensors: &[Sensor]) -> Vec<&'a Example> {
    examples
        .iter()
        .copied()
        .filter(|e| sensors.iter().all(|&s| e.feature(s).is_some()))
        .collect()
}

/// A model that outputs 0.5 for every input over `sensors`.
pub fn trivial_model(label: &str, sensors: &[Sensor], cost: f64) -> SensorModel {
    let dim = sensors.iter().map(|s| s.dim()).sum();
    SensorModel {
        label: label.to_string(),
        sensors: sensors.to_vec(),
        fitted: FittedLinear {
            standardizer: Standardizer::identity(dim),
            model: LinearModel::trivial(dim, cost),
            selection: CostSelection::fixed(cost),
            trivial: true,
        },
    }
}

fn fixed_or_fallback(options: &TrainOptions) -> f64 {
    match options.cost {
        CostPolicy::Fixed(c) => c,
        CostPolicy::Grid { .. } => crate::classifier::FALLBACK_COST,
    }
}

/// Trains one model, falling back to the trivial model when fewer than two
/// labeled examples carry the sensors.
pub fn train_or_trivial(
    examples: &[&Example],
    label: &str,
    sensors: &[Sensor],
    options: &TrainOptions,
) -> Result<SensorModel, ClassifierError> {
    match train_sensor_model(examples.iter().copied(), label, sensors, options) {
        Err(ClassifierError::NoTrainingExamples { .. }) => {
            Ok(trivial_model(label, sensors, fixed_or_fallback(options)))
        }
        other => other,
    }
}

/// One model per sensor, each trained on every example where that sensor is present.
pub fn train_single_sensor_models(
    examples: &[&Example],
    label: &str,
    sensors: &[Sensor],
    options: &TrainOptions,
) -> Result<Vec<SensorModel>, ClassifierError> {
    sensors
        .par_iter()
        .map(|&s| train_or_trivial(examples, label, &[s], options))
        .collect()
}

/// Early fusion over the concatenation of `sensors`, trained only on
/// examples that carry all of them.
pub fn early_fusion(
    examples: &[&Example],
    label: &str,
    sensors: &[Sensor],
    options: &TrainOptions,
) -> Result<FusionModel, FusionError> {
    let complete = complete_examples(examples, sensors);
    let model = match train_sensor_model(complete.iter().copied(), label, sensors, options) {
        Err(ClassifierError::NoTrainingExamples { .. }) => {
            return Err(FusionError::NoCompleteExamples {
                label: label.to_string(),
            })
        }
        other => other?,
    };
    Ok(FusionModel {
        variant: FusionVariant::Early,
        label: label.to_string(),
        components: vec![model],
        second_layer: None,
    })
}

/// Rows of component probabilities and targets for examples with every
/// component sensor and a known label value.
pub fn second_layer_inputs(
    components: &[SensorModel],
    examples: &[&Example],
    label: &str,
) -> Result<(Matrix, Vec<bool>), ClassifierError> {
    let mut rows = Vec::new();
    let mut y = Vec::new();
    for ex in examples {
        let Some(target) = ex.label(label).as_bool() else {
            continue;
        };
        let mut row = Vec::with_capacity(components.len());
        let mut complete = true;
        for m in components {
            match m.predict_example(ex) {
                Ok(p) => row.push(p),
                Err(ClassifierError::MissingSensor(_)) => {
                    complete = false;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if complete {
            rows.push(row);
            y.push(target);
        }
    }
    Ok((Matrix::from_rows(&rows, components.len()), y))
}

/// Learns the second layer over the components' in-sample probabilities on
/// examples with every component sensor. Inputs are raw probabilities, so the
/// second layer has no standardizer.
pub fn late_fusion_learned(
    examples: &[&Example],
    label: &str,
    components: Vec<SensorModel>,
    options: &TrainOptions,
) -> Result<FusionModel, FusionError> {
    let (x, y) = second_layer_inputs(&components, examples, label)?;
    if x.rows() < 2 {
        return Err(FusionError::NoCompleteExamples {
            label: label.to_string(),
        });
    }
    let constant = (0..x.cols()).all(|j| (0..x.rows()).all(|i| x.get(i, j) == x.get(0, j)));
    if constant {
        return Err(FusionError::DegenerateInputs);
    }
    let fitted = fit_pipeline(&x, &y, options)?;
    // undo the standardizer so the weights apply to raw probabilities
    let second = raw_input_layer(fitted);
    Ok(FusionModel {
        variant: FusionVariant::LateLearned,
        label: label.to_string(),
        components,
        second_layer: Some(second),
    })
}

/// Folds a standardizer into the linear weights: `w'ⱼ = wⱼ/sⱼ`,
/// `b' = b − Σ wⱼ mⱼ/sⱼ`. The decision function is unchanged.
fn raw_input_layer(fitted: FittedLinear) -> FittedLinear {
    let FittedLinear {
        standardizer,
        model,
        selection,
        trivial,
    } = fitted;
    let weights: Vec<f64> = model
        .weights
        .iter()
        .zip(&standardizer.stds)
        .map(|(w, s)| w / s)
        .collect();
    let shift: f64 = weights.iter().zip(&standardizer.means).map(|(w, m)| w * m).sum();
    FittedLinear {
        standardizer: Standardizer::identity(weights.len()),
        model: LinearModel {
            intercept: model.intercept - shift,
            weights,
            cost: model.cost,
        },
        selection,
        trivial,
    }
}

/// Trains the requested fusion system.
pub fn train_fusion(
    variant: FusionVariant,
    examples: &[&Example],
    label: &str,
    sensors: &[Sensor],
    options: &TrainOptions,
) -> Result<FusionModel, FusionError> {
    match variant {
        FusionVariant::Early => early_fusion(examples, label, sensors, options),
        FusionVariant::LateAverage => Ok(FusionModel {
            variant,
            label: label.to_string(),
            components: train_single_sensor_models(examples, label, sensors, options)?,
            second_layer: None,
        }),
        FusionVariant::LateLearned => {
            let components = train_single_sensor_models(examples, label, sensors, options)?;
            late_fusion_learned(examples, label, components, options)
        }
    }
}

impl FusionModel {
    pub fn sensors(&self) -> Vec<Sensor> {
        self.components.iter().flat_map(|m| m.sensors.iter().copied()).collect()
    }

    /// Learned second-layer weights per component sensor.
    pub fn learned_weights(&self) -> Option<Vec<(Sensor, f64)>> {
        let layer = self.second_layer.as_ref()?;
        Some(
            self.components
                .iter()
                .zip(&layer.model.weights)
                .map(|(m, &w)| (m.sensors[0], w))
                .collect(),
        )
    }

    /// Every component model is trivial.
    pub fn is_trivial(&self) -> bool {
        self.components.iter().all(SensorModel::is_trivial)
    }

    /// Probability for an example with every sensor the model uses.
    pub fn predict(&self, example: &Example) -> Result<f64, FusionError> {
        self.predict_with(example, Strictness::Strict).map(|p| p.probability)
    }

    pub fn predict_with(&self, example: &Example, strictness: Strictness) -> Result<FusedPrediction, FusionError> {
        let probability = match self.variant {
            FusionVariant::Early => {
                let m = &self.components[0];
                match m.predict_example(example) {
                    Err(ClassifierError::MissingSensor(s)) => return Err(FusionError::MissingSensor(s)),
                    other => other?,
                }
            }
            FusionVariant::LateAverage => return late_fusion_average(&self.components, example, strictness),
            FusionVariant::LateLearned => {
                let layer = self
                    .second_layer
                    .as_ref()
                    .ok_or_else(|| FusionError::Invalid("missing second layer".into()))?;
                let mut probs = Vec::with_capacity(self.components.len());
                for m in &self.components {
                    match m.predict_example(example) {
                        Err(ClassifierError::MissingSensor(s)) => return Err(FusionError::MissingSensor(s)),
                        other => probs.push(other?),
                    }
                }
                layer.probability(&probs)?
            }
        };
        Ok(FusedPrediction {
            probability,
            decision: probability > 0.5,
            partial: false,
        })
    }

    pub fn write<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "{FUSION_HEADER} {FORMAT_VERSION}")?;
        writeln!(out, "variant {}", self.variant.short_name())?;
        writeln!(out, "label {}", self.label)?;
        writeln!(out, "components {}", self.components.len())?;
        for m in &self.components {
            write_model(m, out)?;
        }
        match &self.second_layer {
            None => writeln!(out, "second_layer 0")?,
            Some(l) => {
                writeln!(out, "second_layer {}", l.model.dim())?;
                writeln!(out, "cost {}", l.model.cost)?;
                writeln!(out, "trivial {}", u8::from(l.trivial))?;
                writeln!(out, "fallback {}", u8::from(l.selection.fallback))?;
                let w: Vec<String> = l.model.weights.iter().map(|v| v.to_string()).collect();
                writeln!(out, "weights {}", w.join(" "))?;
                writeln!(out, "intercept {}", l.model.intercept)?;
            }
        }
        writeln!(out, "end")
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("model text is utf-8")
    }

    pub fn read<R: BufRead>(input: R) -> Result<Self, ClassifierError> {
        let mut r = LineReader::new(input);
        r.expect_header(FUSION_HEADER)?;
        let v = r.expect("variant")?;
        let variant = FusionVariant::from_short_name(&v).ok_or_else(|| r.error(format!("unknown variant `{v}`")))?;
        let label = r.expect("label")?;
        let n = r.expect_usize("components")?;
        let components = (0..n)
            .map(|_| read_model_from(&mut r))
            .collect::<Result<Vec<_>, _>>()?;
        let d = r.expect_usize("second_layer")?;
        let second_layer = if d == 0 {
            None
        } else {
            if d != n {
                return Err(r.error("second layer width must equal the component count"));
            }
            let cost = r.expect_f64("cost")?;
            let trivial = r.expect_flag("trivial")?;
            let fallback = r.expect_flag("fallback")?;
            let weights = r.expect_vec("weights", d)?;
            let intercept = r.expect_f64("intercept")?;
            Some(FittedLinear {
                standardizer: Standardizer::identity(d),
                model: LinearModel {
                    weights,
                    intercept,
                    cost,
                },
                selection: CostSelection {
                    cost,
                    fallback,
                    validation_f1: Vec::new(),
                },
                trivial,
            })
        };
        r.expect("end")?;
        if (variant == FusionVariant::LateLearned) != second_layer.is_some() {
            return Err(r.error("second layer present exactly for learned late fusion"));
        }
        Ok(Self {
            variant,
            label,
            components,
            second_layer,
        })
    }
}

/// One binary model per class over the concatenated features of `sensors`;
/// predictions take the most probable class.
#[derive(Debug, Clone, PartialEq)]
pub struct OneVsRestModel {
    pub classes: Vec<String>,
    pub sensors: Vec<Sensor>,
    pub models: Vec<FittedLinear>,
}

/// Cost used by the multiclass experiment.
pub const MULTICLASS_COST: f64 = 1.0;

/// Examples with every sensor and exactly one relevant label from `classes`,
/// paired with that class index.
pub fn single_label_examples<'a>(
    examples: &[&'a Example],
    classes: &[String],
    sensors: &[Sensor],
) -> Vec<(&'a Example, usize)> {
    examples
        .iter()
        .copied()
        .filter(|e| sensors.iter().all(|&s| e.feature(s).is_some()))
        .filter_map(|e| {
            let hits: Vec<usize> = classes
                .iter()
                .enumerate()
                .filter(|(_, c)| e.label(c) == crate::sensor::LabelValue::Relevant)
                .map(|(i, _)| i)
                .collect();
            (hits.len() == 1).then(|| (e, hits[0]))
        })
        .collect()
}

pub fn multiclass_one_vs_rest(
    examples: &[&Example],
    classes: &[String],
    sensors: &[Sensor],
) -> Result<OneVsRestModel, FusionError> {
    let selected = single_label_examples(examples, classes, sensors);
    for (i, c) in classes.iter().enumerate() {
        if !selected.iter().any(|&(_, k)| k == i) {
            return Err(FusionError::EmptyClass(c.clone()));
        }
    }
    let dim = sensors.iter().map(|s| s.dim()).sum();
    let rows: Vec<Vec<f64>> = selected
        .iter()
        .map(|(e, _)| feature_row(e, sensors).expect("filtered on sensors"))
        .collect();
    let x = Matrix::from_rows(&rows, dim);
    let options = TrainOptions::fixed(MULTICLASS_COST);
    let models = (0..classes.len())
        .into_par_iter()
        .map(|c| {
            let y: Vec<bool> = selected.iter().map(|&(_, k)| k == c).collect();
            fit_pipeline(&x, &y, &options)
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(OneVsRestModel {
        classes: classes.to_vec(),
        sensors: sensors.to_vec(),
        models,
    })
}

impl OneVsRestModel {
    /// Index of the most probable class; ties go to the earlier class.
    pub fn predict_row(&self, raw_row: &[f64]) -> Result<usize, ClassifierError> {
        let mut best = (0, f64::NEG_INFINITY);
        for (i, m) in self.models.iter().enumerate() {
            let p = m.probability(raw_row)?;
            if p > best.1 {
                best = (i, p);
            }
        }
        Ok(best.0)
    }

    pub fn predict(&self, example: &Example) -> Result<usize, FusionError> {
        for &s in &self.sensors {
            if example.feature(s).is_none() {
                return Err(FusionError::MissingSensor(s));
            }
        }
        let row = feature_row(example, &self.sensors).expect("sensors checked");
        Ok(self.predict_row(&row)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensor::{FeatureVector, LabelValue};

    fn constant_model(sensor: Sensor, p: f64) -> SensorModel {
        let mut m = trivial_model("X", &[sensor], 1.0);
        m.fitted.model.intercept = (p / (1.0 - p)).ln();
        m.fitted.trivial = false;
        m
    }

    fn full_example() -> Example {
        let mut ex = Example::new("u", 0);
        for s in Sensor::ALL {
            ex = ex.with_features(FeatureVector::from_optional(s, vec![0.0; s.dim()]).unwrap());
        }
        ex
    }

    #[test]
    fn average_of_tie_and_mixed_probabilities() {
        let ex = full_example();
        let half: Vec<SensorModel> = Sensor::ALL.iter().map(|&s| constant_model(s, 0.5)).collect();
        let p = late_fusion_average(&half, &ex, Strictness::Strict).unwrap();
        assert_eq!(p.probability, 0.5);
        assert!(!p.decision);
        let ps = [0.9, 0.7, 0.5, 0.5, 0.5, 0.5];
        let mixed: Vec<SensorModel> = Sensor::ALL.iter().zip(ps).map(|(&s, p)| constant_model(s, p)).collect();
        let p = late_fusion_average(&mixed, &ex, Strictness::Strict).unwrap();
        assert!((p.probability - 0.6).abs() < 1e-12);
        assert!(p.decision);
    }

    #[test]
    fn strict_and_lenient_missing_sensor() {
        let mut ex = full_example();
        ex.features.remove(&Sensor::Aud);
        let models: Vec<SensorModel> = Sensor::ALL.iter().map(|&s| constant_model(s, 0.8)).collect();
        assert!(matches!(
            late_fusion_average(&models, &ex, Strictness::Strict),
            Err(FusionError::MissingSensor(Sensor::Aud))
        ));
        let p = late_fusion_average(&models, &ex, Strictness::Lenient).unwrap();
        assert!(p.partial);
        assert!((p.probability - 0.8).abs() < 1e-12);
    }

    #[test]
    fn constant_second_layer_inputs_are_rejected() {
        let exs: Vec<Example> = (0..6)
            .map(|i| {
                let mut e = full_example();
                e.timestamp = i;
                e.with_label("X", LabelValue::from_bool(i % 2 == 0))
            })
            .collect();
        let refs: Vec<&Example> = exs.iter().collect();
        let comps: Vec<SensorModel> = Sensor::ALL.iter().map(|&s| trivial_model("X", &[s], 1.0)).collect();
        assert!(matches!(
            late_fusion_learned(&refs, "X", comps, &TrainOptions::fixed(1.0)),
            Err(FusionError::DegenerateInputs)
        ));
    }

    #[test]
    fn folding_the_standardizer_preserves_decisions() {
        let fitted = FittedLinear {
            standardizer: Standardizer {
                means: vec![0.4, 0.6],
                stds: vec![0.1, 0.2],
                fully_masked: vec![false, false],
            },
            model: LinearModel {
                weights: vec![1.5, -0.5],
                intercept: 0.3,
                cost: 1.0,
            },
            selection: CostSelection::fixed(1.0),
            trivial: false,
        };
        let raw = raw_input_layer(fitted.clone());
        for row in [[0.1, 0.9], [0.5, 0.5], [0.77, 0.2]] {
            let a = fitted.probability(&row).unwrap();
            let b = raw.probability(&row).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fusion_text_round_trip() {
        let comps: Vec<SensorModel> = Sensor::ALL.iter().map(|&s| constant_model(s, 0.3)).collect();
        let m = FusionModel {
            variant: FusionVariant::LateLearned,
            label: "X".into(),
            components: comps,
            second_layer: Some(FittedLinear {
                standardizer: Standardizer::identity(6),
                model: LinearModel {
                    weights: vec![0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
                    intercept: -1.0,
                    cost: 10.0,
                },
                selection: CostSelection::fixed(10.0),
                trivial: false,
            }),
        };
        let text = m.to_text();
        let back = FusionModel::read(text.as_bytes()).unwrap();
        assert_eq!(back, m);
        assert!(FusionModel::read(text.replace("variant lfl", "variant lfa").as_bytes()).is_err());
    }
}
