use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ctxrec_core::classifier::TrainOptions;
use ctxrec_core::evaluation::confusion_matrix;
use ctxrec_core::fusion::{
    early_fusion, multiclass_one_vs_rest, train_fusion, FusionError, FusionModel, FusionVariant, Strictness,
};
use ctxrec_core::synthetic::{self, TARGET};
use ctxrec_core::{Example, FeatureVector, LabelValue, Sensor};

/// The label is the sign of `acc[0] + aud[0]`: each sensor alone sees half
/// of the evidence, the concatenation sees all of it.
fn sum_of_two(n: usize, seed: u64) -> Vec<Example> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let mut ex = Example::new("u", i as i64);
            let mut first = [0.0; 2];
            for (k, s) in [Sensor::Acc, Sensor::Aud].into_iter().enumerate() {
                let v: Vec<f64> = (0..s.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
                first[k] = v[0];
                ex = ex.with_features(FeatureVector::from_optional(s, v).unwrap());
            }
            ex.with_label(TARGET, LabelValue::from_bool(first[0] + first[1] > 0.0))
        })
        .collect()
}

fn accuracy(model: &FusionModel, examples: &[Example]) -> f64 {
    let hits = examples
        .iter()
        .filter(|e| (model.predict(e).unwrap() > 0.5) == (e.label(TARGET) == LabelValue::Relevant))
        .count();
    hits as f64 / examples.len() as f64
}

#[test]
fn early_fusion_combines_evidence_across_sensors() {
    let train = sum_of_two(1500, 1);
    let test = sum_of_two(1500, 2);
    let refs: Vec<&Example> = train.iter().collect();
    let opts = TrainOptions::grid(4);
    let sensors = [Sensor::Acc, Sensor::Aud];
    let ef = early_fusion(&refs, TARGET, &sensors, &opts).unwrap();
    let acc_only = early_fusion(&refs, TARGET, &[Sensor::Acc], &opts).unwrap();
    let ef_acc = accuracy(&ef, &test);
    let single = accuracy(&acc_only, &test);
    assert!(ef_acc > 0.95, "EF accuracy {ef_acc}");
    assert!(ef_acc > single + 0.15, "EF {ef_acc} vs single {single}");
}

#[test]
fn learned_weights_favor_informative_sensors() {
    let d = synthetic::complementary_dataset(&synthetic::ComplementaryConfig {
        users: 2,
        per_user: 1000,
        ..Default::default()
    });
    let refs: Vec<&Example> = d.examples().collect();
    let m = train_fusion(FusionVariant::LateLearned, &refs, TARGET, &Sensor::ALL, &TrainOptions::grid(2)).unwrap();
    let weights = m.learned_weights().unwrap();
    let min_informative = weights
        .iter()
        .filter(|(s, _)| matches!(s, Sensor::Acc | Sensor::Aud))
        .map(|(_, w)| *w)
        .fold(f64::INFINITY, f64::min);
    for (s, w) in &weights {
        if !matches!(s, Sensor::Acc | Sensor::Aud) {
            assert!(w.abs() < min_informative, "{s}: {w} vs {min_informative}");
        }
    }
}

#[test]
fn late_average_strict_and_lenient() {
    let d = synthetic::separable_dataset(1, 60, 3);
    let refs: Vec<&Example> = d.examples().collect();
    let m = train_fusion(FusionVariant::LateAverage, &refs, TARGET, &Sensor::ALL, &TrainOptions::fixed(1.0)).unwrap();
    let mut ex = refs[0].clone();
    ex.features.remove(&Sensor::Loc);
    assert!(matches!(m.predict_with(&ex, Strictness::Strict), Err(FusionError::MissingSensor(Sensor::Loc))));
    let lenient = m.predict_with(&ex, Strictness::Lenient).unwrap();
    assert!(lenient.partial);
    let by_hand: Vec<f64> = m
        .components
        .iter()
        .filter(|c| c.sensors != [Sensor::Loc])
        .map(|c| c.predict_example(&ex).unwrap())
        .collect();
    let mean = by_hand.iter().sum::<f64>() / by_hand.len() as f64;
    assert!((lenient.probability - mean).abs() < 1e-15);
}

#[test]
fn fusion_models_survive_text_round_trip() {
    let d = synthetic::separable_dataset(2, 50, 8);
    let refs: Vec<&Example> = d.examples().collect();
    for v in [FusionVariant::Early, FusionVariant::LateAverage, FusionVariant::LateLearned] {
        let m = train_fusion(v, &refs, TARGET, &Sensor::ALL, &TrainOptions::grid(6)).unwrap();
        let back = FusionModel::read(m.to_text().as_bytes()).unwrap();
        for ex in &refs {
            assert_eq!(back.predict(ex).unwrap(), m.predict(ex).unwrap(), "{v:?}");
        }
    }
}

#[test]
fn one_vs_rest_recovers_three_classes() {
    let classes: Vec<String> = ["SITTING", "WALKING", "LYING_DOWN"].iter().map(|s| s.to_string()).collect();
    let names: Vec<&str> = classes.iter().map(String::as_str).collect();
    let train = synthetic::multiclass_examples(&names, 900, 3.0, 1);
    let test = synthetic::multiclass_examples(&names, 600, 3.0, 2);
    let refs: Vec<&Example> = train.iter().collect();
    let model = multiclass_one_vs_rest(&refs, &classes, &Sensor::ALL).unwrap();
    let truth: Vec<usize> = test
        .iter()
        .map(|e| names.iter().position(|c| e.label(c) == LabelValue::Relevant).unwrap())
        .collect();
    let predicted: Vec<usize> = test.iter().map(|e| model.predict(e).unwrap()).collect();
    let cm = confusion_matrix(&truth, &predicted, &classes).unwrap();
    for (k, row) in cm.counts.iter().enumerate() {
        let n = truth.iter().filter(|&&t| t == k).count() as u64;
        assert_eq!(row.iter().sum::<u64>(), n);
        let recall = row[k] as f64 / n as f64;
        assert!(recall > 0.9, "class {k} recall {recall}");
    }
}

#[test]
fn one_vs_rest_needs_every_class() {
    let names = ["A", "B"];
    let mut exs = synthetic::multiclass_examples(&names, 20, 3.0, 1);
    for e in &mut exs {
        e.set_label("B", LabelValue::NotRelevant);
        e.set_label("A", LabelValue::Relevant);
    }
    let refs: Vec<&Example> = exs.iter().collect();
    let classes = vec!["A".to_string(), "B".to_string()];
    assert!(matches!(
        multiclass_one_vs_rest(&refs, &classes, &Sensor::ALL),
        Err(FusionError::EmptyClass(c)) if c == "B"
    ));
}
