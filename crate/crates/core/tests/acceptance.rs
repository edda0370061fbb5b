//! Acceptance checks, one line per criterion.
//!
//! Run with `cargo test -p ctxrec-core --test acceptance`. Criterion 10 needs
//! the public per-user feature files: set `CTXREC_DATASET_DIR` to the
//! directory holding `<uuid>.features_labels.csv.gz` and, optionally,
//! `CTXREC_FOLDS_DIR` to the fold lists (default `<dataset>/cv_5_folds`).

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ctxrec_core::classifier::{
    class_weights, feature_row, train_linear, ClassWeighting, LogisticObjective, Matrix, TrainOptions,
};
use ctxrec_core::evaluation::{
    compute_metrics, cross_validate, partition_folds, random_baseline_p99, CvOptions, FoldPartition, Metric,
    MetricCounts, System,
};
use ctxrec_core::features::signal::{value_entropy, VALUE_ENTROPY_BINS};
use ctxrec_core::features::{extract_features, extract_phone_state_features, time_bins, SpectralConfig, ONE_HOT_GROUPS};
use ctxrec_core::fusion::{average_probabilities, FusionVariant};
use ctxrec_core::personalization::run_personalization;
use ctxrec_core::sensor::{
    AppState, BatteryPlugged, BatteryState, Example, LabelValue, PhoneStateSnapshot, RingerMode, WifiStatus,
};
use ctxrec_core::synthetic::{self, ComplementaryConfig, TARGET};
use ctxrec_core::{Sensor, EARLY_FUSION_DIM};

enum Outcome {
    Pass(String),
    Fail(String),
    Skip(String),
}

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

// 1. dimension contract

fn dimensions() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let config = SpectralConfig::default();
    let expected = [26, 26, 46, 17, 26, 34];
    for i in 0..1000 {
        let mut ex = Example::new("u", i);
        ex.sensor_data = synthetic::random_session(&mut rng);
        let f = extract_features(&ex, &config).map_err(|e| format!("input {i}: {e}"))?;
        for (s, want) in Sensor::ALL.into_iter().zip(expected) {
            let got = f.get(&s).map_or(0, |v| v.len());
            ensure(got == want, || format!("input {i}: {s} has {got} features, expected {want}"))?;
        }
        ex.features = f;
        let row = feature_row(&ex, &Sensor::ALL).ok_or_else(|| format!("input {i}: a sensor is fully masked"))?;
        ensure(row.len() == 175 && EARLY_FUSION_DIM == 175, || format!("EF length {}", row.len()))?;
    }
    Ok("1000 random sessions: 26/26/46/17/26/34, EF 175".into())
}

// 2. metric oracle

fn brute_force(truth: &[bool], pred: &[bool]) -> [u64; 4] {
    let mut c = [0u64; 4];
    for i in 0..truth.len() {
        let k = match (truth[i], pred[i]) {
            (true, true) => 0,
            (false, false) => 1,
            (false, true) => 2,
            (true, false) => 3,
        };
        c[k] += 1;
    }
    c
}

fn div(a: u64, b: u64) -> Option<f64> {
    (b > 0).then(|| a as f64 / b as f64)
}

fn metric_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for trial in 0..1000 {
        let n = rng.random_range(1..300);
        let p_true = rng.random_range(0.0..1.0);
        let p_pred = rng.random_range(0.0..1.0);
        let truth: Vec<bool> = (0..n).map(|_| rng.random_bool(p_true)).collect();
        let pred: Vec<bool> = (0..n).map(|_| rng.random_bool(p_pred)).collect();
        let [tp, tn, fp, fn_] = brute_force(&truth, &pred);
        let c = MetricCounts::from_predictions(&truth, &pred);
        ensure((c.tp, c.tn, c.fp, c.fn_) == (tp, tn, fp, fn_), || format!("trial {trial}: counts"))?;
        let r = compute_metrics(&c);
        let tpr = div(tp, tp + fn_);
        let tnr = div(tn, tn + fp);
        let prec = div(tp, tp + fp);
        let acc = div(tp + tn, n as u64);
        let ba = tpr.zip(tnr).map(|(a, b)| (a + b) / 2.0);
        let f1 = if 2 * tp + fp + fn_ == 0 { 0.0 } else { 2.0 * tp as f64 / (2 * tp + fp + fn_) as f64 };
        ensure(
            r.accuracy == acc && r.tpr == tpr && r.tnr == tnr && r.precision == prec && r.ba == ba && r.f1 == f1,
            || format!("trial {trial}: {r:?}"),
        )?;
    }
    let r = compute_metrics(&MetricCounts::new(3, 4, 2, 1));
    let ba = r.get(Metric::Ba).unwrap_or(f64::NAN);
    ensure((ba - 0.708_333_333_333_333_3).abs() <= 1e-12, || format!("worked BA {ba}"))?;
    ensure((r.f1 - 2.0 / 3.0).abs() <= 1e-12, || format!("worked F1 {}", r.f1))?;
    Ok(format!("1000 random vectors exact; worked example BA {ba:.4} F1 {:.4}", r.f1))
}

// 3. gradient check

fn gradient_check() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for inst in 0..100 {
        let n = rng.random_range(4..40);
        let d = rng.random_range(1..8);
        let data: Vec<f64> = (0..n * d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let x = Matrix::from_vec(n, d, data);
        let mut y: Vec<bool> = (0..n).map(|_| rng.random_bool(0.3)).collect();
        y[0] = true;
        y[1] = false;
        let weighting = if inst % 2 == 0 { ClassWeighting::Balanced } else { ClassWeighting::Uniform };
        let cost = 10f64.powf(rng.random_range(-3.0..2.0));
        let obj = LogisticObjective::new(&x, &y, class_weights(&y, weighting), cost);
        let params: Vec<f64> = (0..d + 1).map(|_| rng.random_range(-2.0..2.0)).collect();
        let analytic = obj.gradient(&params);
        let numeric: Vec<f64> = (0..d + 1)
            .map(|j| {
                let h = 1e-5 * params[j].abs().max(1.0);
                let mut p = params.clone();
                p[j] += h;
                let up = obj.value(&p);
                p[j] -= 2.0 * h;
                let down = obj.value(&p);
                (up - down) / (2.0 * h)
            })
            .collect();
        let diff = analytic.iter().zip(&numeric).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let scale = analytic.iter().map(|a| a * a).sum::<f64>().sqrt();
        let rel = diff / scale;
        worst = worst.max(rel);
        ensure(rel <= 1e-4, || format!("instance {inst}: relative error {rel:.3e}"))?;
    }
    Ok(format!("100 instances, worst relative error {worst:.2e}"))
}

// 4. balanced weights on 9 negatives vs 1 positive

/// Gradient descent on `(w, b)`, independent of the library solver.
fn descend(xs: &[f64], y: &[bool], alpha: &[f64], cost: f64) -> (f64, f64) {
    let (mut w, mut b) = (0.0f64, 0.0f64);
    let lr = 1.0 / (1.0 + 0.5 * cost * alpha.iter().sum::<f64>() * 2.0);
    for _ in 0..400_000 {
        let (mut gw, mut gb) = (w, 0.0);
        for i in 0..xs.len() {
            let p = 1.0 / (1.0 + (-(w * xs[i] + b)).exp());
            let r = cost * alpha[i] * (p - f64::from(u8::from(y[i])));
            gw += r * xs[i];
            gb += r;
        }
        w -= lr * gw;
        b -= lr * gb;
    }
    (w, b)
}

fn balanced_weights() -> Check {
    let mut xs = vec![-1.0; 9];
    xs.push(1.0);
    let mut y = vec![false; 9];
    y.push(true);
    let x = Matrix::from_vec(10, 1, xs.clone());
    let cost = 0.01;
    let balanced = train_linear(&x, &y, cost, ClassWeighting::Balanced).map_err(|e| e.to_string())?;
    let uniform = train_linear(&x, &y, cost, ClassWeighting::Uniform).map_err(|e| e.to_string())?;
    let pb = balanced.probability(&[1.0]);
    let pu = uniform.probability(&[1.0]);
    ensure(pb > 0.5, || format!("balanced model gives the positive p = {pb:.4}"))?;
    ensure(pu <= 0.5, || format!("uniform control gives the positive p = {pu:.4}"))?;
    for (model, weighting) in [(&balanced, ClassWeighting::Balanced), (&uniform, ClassWeighting::Uniform)] {
        let (w, b) = descend(&xs, &y, &class_weights(&y, weighting), cost);
        ensure(
            (model.weights[0] - w).abs() < 1e-6 && (model.intercept - b).abs() < 1e-6,
            || format!("{weighting:?}: solver ({}, {}) vs descent ({w}, {b})", model.weights[0], model.intercept),
        )?;
    }
    Ok(format!("C = {cost}: balanced p = {pb:.4}, uniform p = {pu:.4}, both match gradient descent"))
}

// 5. coin-flip baseline

fn random_baseline() -> Check {
    let total = 176_941;
    let big = random_baseline_p99(54_359, total, 100, 5).get(Metric::Ba).ok_or("undefined BA")?;
    let small = random_baseline_p99(122, total, 100, 5).get(Metric::Ba).ok_or("undefined BA")?;
    ensure((big - 0.50).abs() <= 0.005, || format!("n_e = 54359: p99 {big:.4}"))?;
    ensure((small - 0.55).abs() <= 0.02, || format!("n_e = 122: p99 {small:.4}"))?;
    Ok(format!("p99 BA {big:.4} (n_e 54359), {small:.4} (n_e 122)"))
}

// 6. fusion on complementary sensors

fn fusion_sanity() -> Check {
    let config = ComplementaryConfig::default();
    let dataset = synthetic::complementary_dataset(&config);
    let users: Vec<_> = dataset.platforms().iter().map(|(u, p)| (u.clone(), *p)).collect();
    let partition = partition_folds(&users, 5, 11).map_err(|e| e.to_string())?;
    let options = CvOptions::new(TrainOptions::grid(23), 29);
    let result = cross_validate(&dataset, &[TARGET.to_string()], &System::ALL, &partition, &options)
        .map_err(|e| e.to_string())?;
    let label = result.label(TARGET).ok_or("no result")?;
    let ba = |s: System| label.systems.get(&s).and_then(|r| r.report.ba).unwrap_or(0.0);
    let best_single = Sensor::ALL.into_iter().map(|s| ba(System::Single(s))).fold(0.0, f64::max);
    let mut parts = vec![format!("best single {best_single:.3}")];
    for v in [FusionVariant::Early, FusionVariant::LateAverage, FusionVariant::LateLearned] {
        let b = ba(System::Fusion(v));
        parts.push(format!("{} {b:.3}", v.short_name()));
        ensure(b >= best_single - 0.02, || format!("{} BA {b:.3} < best single {best_single:.3} - 0.02", v.short_name()))?;
    }
    let weights = label.lfl_weights.as_ref().ok_or("no LFL weights")?;
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));
    let top: Vec<Sensor> = order[..2].iter().map(|&i| Sensor::ALL[i]).collect();
    ensure(
        config.informative.iter().all(|s| top.contains(s)),
        || format!("largest LFL weights on {top:?}, weights {weights:?}"),
    )?;
    parts.push(format!("LFL top weights {top:?}"));
    Ok(parts.join(", "))
}

// 7. time bins

fn time_bins_check() -> Check {
    for h in 0..24u8 {
        let on = time_bins(h).iter().filter(|&&b| b).count();
        ensure(on == 2, || format!("hour {h} activates {on} bins"))?;
    }
    Ok("every hour activates exactly 2 of 8 bins".into())
}

// 8. entropy and normalization invariants

fn phone_state_strategy() -> impl Strategy<Value = PhoneStateSnapshot> {
    (
        proptest::option::of(prop::sample::select(vec![AppState::Active, AppState::Inactive, AppState::Background])),
        proptest::option::of(prop::sample::select(vec![
            BatteryPlugged::Ac,
            BatteryPlugged::Usb,
            BatteryPlugged::Wireless,
        ])),
        proptest::option::of(prop::sample::select(vec![
            BatteryState::Unknown,
            BatteryState::Unplugged,
            BatteryState::NotCharging,
            BatteryState::Discharging,
            BatteryState::Charging,
            BatteryState::Full,
        ])),
        proptest::option::of(any::<bool>()),
        proptest::option::of(prop::sample::select(vec![
            RingerMode::Normal,
            RingerMode::SilentNoVibrate,
            RingerMode::SilentWithVibrate,
        ])),
        proptest::option::of(prop::sample::select(vec![
            WifiStatus::NotReachable,
            WifiStatus::ViaWifi,
            WifiStatus::ViaWwan,
        ])),
        0u8..24,
    )
        .prop_map(|(a, p, s, c, r, w, h)| PhoneStateSnapshot {
            app_state: a,
            battery_plugged: p,
            battery_state: s,
            in_phone_call: c,
            ringer_mode: r,
            wifi_status: w,
            hour_of_day: h,
        })
}

fn invariants() -> Check {
    let mut runner = TestRunner::new(Config {
        cases: 2000,
        failure_persistence: None,
        ..Config::default()
    });
    let upper = (VALUE_ENTROPY_BINS as f64).ln();
    runner
        .run(&prop::collection::vec(-1e6f64..1e6, 1..500), |xs| {
            let h = value_entropy(&xs);
            prop_assert!((0.0..=upper).contains(&h), "entropy {h}");
            Ok(())
        })
        .map_err(|e| format!("value entropy: {e}"))?;
    runner
        .run(&phone_state_strategy(), |ps| {
            let v = extract_phone_state_features(&ps);
            let mut start = 0;
            for g in ONE_HOT_GROUPS {
                let sum: f64 = v.values()[start..start + g].iter().sum();
                prop_assert_eq!(sum, 1.0);
                start += g;
            }
            Ok(())
        })
        .map_err(|e| format!("one-hot groups: {e}"))?;
    runner
        .run(&prop::collection::vec(0.0f64..=1.0, 1..12), |ps| {
            let m = average_probabilities(&ps);
            let lo = ps.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = ps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo <= m && m <= hi, "{m} outside [{lo}, {hi}]");
            Ok(())
        })
        .map_err(|e| format!("LFA range: {e}"))?;
    Ok("2000 cases each: entropy in [0, ln 20], one-hot sums 1, LFA within [min, max]".into())
}

// 9. personalization protocol

fn personalization_protocol() -> Check {
    const RARE: &str = "RARE";
    let mut dataset = synthetic::drift_dataset(6, 200, 0, 41);
    let user = synthetic::synthetic_user(0);
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for ex in dataset.examples_mut() {
        // the test user has positives only in its second half
        let y = if ex.user_id == user { ex.timestamp >= 60 * 150 } else { rng.random_bool(0.3) };
        ex.set_label(RARE, LabelValue::from_bool(y));
    }
    let users: Vec<_> = dataset.platforms().iter().map(|(u, p)| (u.clone(), *p)).collect();
    let partition = partition_folds(&users, 3, 47).map_err(|e| e.to_string())?;
    let labels = [TARGET.to_string(), RARE.to_string()];
    let report = run_personalization(&dataset, &user, &labels, Some(&partition), &TrainOptions::grid(53))
        .map_err(|e| e.to_string())?;

    let rare = report.labels.iter().find(|l| l.label == RARE).ok_or("no RARE result")?;
    ensure(rare.adaptation_positives == 0, || format!("{} adaptation positives", rare.adaptation_positives))?;
    ensure(rare.individual_trivial, || "individual model is not trivial".into())?;
    ensure(
        rare.individual.ba == Some(0.5) && rare.individual.f1 == 0.0,
        || format!("individual BA {:?} F1 {}", rare.individual.ba, rare.individual.f1),
    )?;
    let mut checked = 0;
    for l in &report.labels {
        for (id, pu, pi, pa) in &l.probabilities {
            ensure(*pa == (pu + pi) / 2.0, || format!("{}: adapted {pa} at {id:?}", l.label))?;
            checked += 1;
        }
    }

    // identities recomputed from the raw data
    let own: Vec<&Example> = dataset.user_examples(&user).iter().collect();
    let mut ts: Vec<i64> = own.iter().map(|e| e.timestamp).collect();
    ts.sort();
    let cut = ts[ts.len().div_ceil(2)];
    let fold = partition.fold_of(&user).ok_or("user not in partition")?;
    let deployment: Vec<_> = own.iter().filter(|e| e.timestamp >= cut).map(|e| e.id()).collect();
    let leaked = deployment
        .iter()
        .filter(|id| {
            report.audit.universal_train.contains(id)
                || report.audit.individual_train.contains(id)
                || partition.fold_of(&id.user_id) != Some(fold)
        })
        .count();
    ensure(leaked == 0, || format!("{leaked} deployment examples overlap training"))?;
    ensure(
        report.audit.universal_train.iter().all(|id| partition.fold_of(&id.user_id) != Some(fold)),
        || "universal model saw the test user's fold".into(),
    )?;
    ensure(report.audit.overlap() == 0, || "audit reports overlap".into())?;
    Ok(format!(
        "zero-positive label BA 0.5 / F1 0; {checked} adapted probabilities equal the mean; no overlap"
    ))
}

// 10. public dataset

fn dataset_reproduction() -> Option<Check> {
    let dir = PathBuf::from(std::env::var_os("CTXREC_DATASET_DIR")?);
    Some(run_dataset_reproduction(dir))
}

fn run_dataset_reproduction(dir: PathBuf) -> Check {
    use ctxrec_core::ingest::{load_fold_directory, read_features_dir};
    let folds_dir = std::env::var_os("CTXREC_FOLDS_DIR").map_or_else(|| dir.join("cv_5_folds"), PathBuf::from);
    let (partition, platforms) = load_fold_directory(&folds_dir).map_err(|e| e.to_string())?;
    let dataset = read_features_dir(&dir).map_err(|e| e.to_string())?.with_platforms(platforms);
    let partition = FoldPartition::new(partition.folds, partition.seed).map_err(|e| e.to_string())?;
    let labels = ctxrec_core::labels::parse_label_list(include_str!("../../../data/labels_25.txt"));
    let systems = [
        System::Fusion(FusionVariant::Early),
        System::Fusion(FusionVariant::LateAverage),
        System::Fusion(FusionVariant::LateLearned),
    ];
    let options = CvOptions::new(TrainOptions::grid(1), 1);
    let result = cross_validate(&dataset, &labels, &systems, &partition, &options).map_err(|e| e.to_string())?;
    let mut parts = Vec::new();
    let mut failures = Vec::new();
    for (system, target) in systems.iter().zip([0.77, 0.80, 0.80]) {
        let ba = result.averages(*system).ba.unwrap_or(f64::NAN);
        parts.push(format!("{} {ba:.3}", system.short_name()));
        if (ba - target).abs() > 0.03 {
            failures.push(format!("{} average BA {ba:.3}, target {target}", system.short_name()));
        }
    }
    let lying = result
        .label(ctxrec_core::labels::LYING_DOWN)
        .and_then(|l| l.systems.get(&systems[2]))
        .and_then(|r| r.report.ba)
        .unwrap_or(f64::NAN);
    parts.push(format!("Lying down LFL {lying:.3}"));
    if (lying - 0.88).abs() > 0.03 {
        failures.push(format!("Lying down LFL BA {lying:.3}, target 0.88"));
    }
    if failures.is_empty() {
        Ok(parts.join(", "))
    } else {
        Err(failures.join("; "))
    }
}

fn timed(budget: Duration, f: impl FnOnce() -> Check) -> Outcome {
    let start = Instant::now();
    let result = f();
    let took = start.elapsed();
    match result {
        Ok(msg) if took <= budget => Outcome::Pass(format!("{msg} ({:.1}s)", took.as_secs_f64())),
        Ok(msg) => Outcome::Fail(format!("{msg}, but took {:.1}s > {:.0}s", took.as_secs_f64(), budget.as_secs_f64())),
        Err(msg) => Outcome::Fail(msg),
    }
}

fn main() -> ExitCode {
    let minute = Duration::from_secs(60);
    let criteria: Vec<(&str, Box<dyn FnOnce() -> Outcome>)> = vec![
        ("dimension contract", Box::new(move || timed(minute, dimensions))),
        ("metric oracle", Box::new(move || timed(minute, metric_oracle))),
        ("gradient check", Box::new(move || timed(minute, gradient_check))),
        ("balanced class weights", Box::new(move || timed(minute, balanced_weights))),
        ("random baseline p99", Box::new(move || timed(minute, random_baseline))),
        ("fusion on complementary sensors", Box::new(move || timed(5 * minute, fusion_sanity))),
        ("time-of-day bins", Box::new(|| timed(Duration::from_secs(1), time_bins_check))),
        ("entropy and normalization invariants", Box::new(move || timed(minute, invariants))),
        ("personalization protocol", Box::new(move || timed(minute, personalization_protocol))),
        (
            "public dataset reproduction",
            Box::new(move || match dataset_reproduction() {
                None => Outcome::Skip("CTXREC_DATASET_DIR not set".into()),
                Some(r) => match r {
                    Ok(m) => Outcome::Pass(m),
                    Err(m) => Outcome::Fail(m),
                },
            }),
        ),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.into_iter().enumerate() {
        let (tag, detail) = match run() {
            Outcome::Pass(m) => ("PASS", m),
            Outcome::Fail(m) => {
                failed += 1;
                ("FAIL", m)
            }
            Outcome::Skip(m) => ("SKIP", m),
        };
        println!("[{tag}] {:>2}. {name}: {detail}", i + 1);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
