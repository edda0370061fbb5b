use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ctxrec_core::classifier::{
    class_weights, fit_pipeline, model_from_str, model_to_string, train_linear, train_sensor_model, ClassWeighting,
    LogisticObjective, Matrix, Standardizer, TrainOptions,
};
use ctxrec_core::synthetic::{self, TARGET};
use ctxrec_core::Sensor;

fn ba(truth: &[bool], pred: &[bool]) -> f64 {
    let tpr = truth.iter().zip(pred).filter(|(t, p)| **t && **p).count() as f64 / truth.iter().filter(|t| **t).count() as f64;
    let tnr = truth.iter().zip(pred).filter(|(t, p)| !**t && !**p).count() as f64 / truth.iter().filter(|t| !**t).count() as f64;
    (tpr + tnr) / 2.0
}

/// The class signal lives in x1 - x2; both columns share a large nuisance
/// component, so the separating direction needs large opposing weights.
fn shared_noise_problem(n: usize, seed: u64) -> (Matrix, Vec<bool>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Vec::with_capacity(2 * n);
    let mut y = Vec::with_capacity(n);
    for _ in 0..n {
        let label = rng.random_bool(0.5);
        let shared: f64 = rng.random_range(-20.0..20.0);
        let s = if label { 0.5 } else { -0.5 } + rng.random_range(-0.2..0.2);
        data.push(shared + s);
        data.push(shared);
        y.push(label);
    }
    (Matrix::from_vec(n, 2, data), y)
}

#[test]
fn grid_avoids_underfitting_cost() {
    let (x, y) = shared_noise_problem(600, 1);
    let (xt, yt) = shared_noise_problem(600, 2);
    let score = |opts: &TrainOptions| {
        let m = fit_pipeline(&x, &y, opts).unwrap();
        let pred: Vec<bool> = (0..xt.rows()).map(|i| m.probability(xt.row(i)).unwrap() > 0.5).collect();
        (ba(&yt, &pred), m.selection.cost)
    };
    let (small, _) = score(&TrainOptions::fixed(0.001));
    let (grid, chosen) = score(&TrainOptions::grid(3));
    assert!(small < 0.8, "C = 0.001 should underfit, BA {small}");
    assert!(grid > 0.95, "grid BA {grid}");
    assert!(chosen >= 1.0, "chosen C {chosen}");
}

#[test]
fn serialized_model_predicts_identically() {
    let d = synthetic::separable_dataset(3, 40, 5);
    let m = train_sensor_model(d.examples(), TARGET, &[Sensor::Acc, Sensor::Loc], &TrainOptions::grid(1)).unwrap();
    let text = model_to_string(&m);
    let back = model_from_str(&text).unwrap();
    // validation scores are a training diagnostic and are not stored
    assert_eq!(back.fitted.standardizer, m.fitted.standardizer);
    assert_eq!(back.fitted.model, m.fitted.model);
    assert_eq!(back.fitted.trivial, m.fitted.trivial);
    assert_eq!(back.fitted.selection.cost, m.fitted.selection.cost);
    assert_eq!(back.fitted.selection.fallback, m.fitted.selection.fallback);
    assert_eq!((&back.label, &back.sensors), (&m.label, &m.sensors));
    for ex in d.examples() {
        assert_eq!(back.predict_example(ex).unwrap(), m.predict_example(ex).unwrap());
    }
}

#[test]
fn duplicated_data_with_half_cost_matches() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 50;
    let data: Vec<f64> = (0..n * 3).map(|_| rng.random_range(-1.0..1.0)).collect();
    let y: Vec<bool> = (0..n).map(|i| data[3 * i] + 0.3 * rng.random_range(-1.0..1.0) > 0.2).collect();
    let x = Matrix::from_vec(n, 3, data.clone());
    let x2 = Matrix::from_vec(2 * n, 3, [data.clone(), data].concat());
    let y2 = [y.clone(), y.clone()].concat();
    for w in [ClassWeighting::Balanced, ClassWeighting::Uniform] {
        let a = train_linear(&x, &y, 0.8, w).unwrap();
        let b = train_linear(&x2, &y2, 0.4, w).unwrap();
        for (p, q) in a.weights.iter().zip(&b.weights) {
            assert!((p - q).abs() < 1e-8);
        }
        assert!((a.intercept - b.intercept).abs() < 1e-8);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn gradient_matches_central_differences(
        seed in any::<u64>(),
        n in 3usize..30,
        d in 1usize..6,
        log_cost in -3.0f64..2.0,
        balanced in any::<bool>(),
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Matrix::from_vec(n, d, (0..n * d).map(|_| rng.random_range(-2.0..2.0)).collect());
        let mut y: Vec<bool> = (0..n).map(|_| rng.random_bool(0.5)).collect();
        y[0] = true;
        y[1] = false;
        let w = if balanced { ClassWeighting::Balanced } else { ClassWeighting::Uniform };
        let obj = LogisticObjective::new(&x, &y, class_weights(&y, w), 10f64.powf(log_cost));
        let params: Vec<f64> = (0..=d).map(|_| rng.random_range(-1.5..1.5)).collect();
        let g = obj.gradient(&params);
        for j in 0..=d {
            let h = 1e-5;
            let mut p = params.clone();
            p[j] += h;
            let up = obj.value(&p);
            p[j] -= 2.0 * h;
            let fd = (up - obj.value(&p)) / (2.0 * h);
            prop_assert!((g[j] - fd).abs() <= 1e-5 * g[j].abs().max(1.0), "component {}: {} vs {}", j, g[j], fd);
        }
    }

    #[test]
    fn standardized_columns_have_zero_mean_unit_std(
        rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 4), 2..40),
    ) {
        let x = Matrix::from_rows(&rows, 4);
        let s = Standardizer::fit(&x).unwrap();
        let t = s.transform(&x).unwrap();
        for j in 0..4 {
            let col: Vec<f64> = (0..t.rows()).map(|i| t.get(i, j)).collect();
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / col.len() as f64;
            prop_assert!(mean.abs() < 1e-8);
            prop_assert!(var.abs() < 1e-8 || (var - 1.0).abs() < 1e-8, "variance {}", var);
        }
    }

    #[test]
    fn balanced_weights_give_equal_class_mass(y in prop::collection::vec(any::<bool>(), 2..200)) {
        prop_assume!(y.iter().any(|v| *v) && y.iter().any(|v| !*v));
        let w = class_weights(&y, ClassWeighting::Balanced);
        let pos: f64 = w.iter().zip(&y).filter(|(_, t)| **t).map(|(a, _)| a).sum();
        let neg: f64 = w.iter().zip(&y).filter(|(_, t)| !**t).map(|(a, _)| a).sum();
        prop_assert!((pos - neg).abs() < 1e-9 * pos.max(1.0));
        prop_assert!((pos + neg - y.len() as f64).abs() < 1e-9 * y.len() as f64);
    }
}
