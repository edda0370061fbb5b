use proptest::prelude::*;

use ctxrec_core::cleaning::{adjust_label_by_colabels, apply_updates, clean_dataset, AnchorSet};
use ctxrec_core::labels::{self, KNOWN_LABELS};
use ctxrec_core::sensor::{LocationSeries, LocationUpdate};
use ctxrec_core::{Dataset, Example, LabelValue};

fn label_value() -> impl Strategy<Value = LabelValue> {
    prop_oneof![Just(LabelValue::Relevant), Just(LabelValue::NotRelevant), Just(LabelValue::Missing)]
}

fn example_strategy() -> impl Strategy<Value = Example> {
    (
        prop::collection::vec(label_value(), KNOWN_LABELS.len()),
        prop::option::of((-1e-3f64..1e-3, -1e-3f64..1e-3, 1.0f64..50.0)),
    )
        .prop_map(|(values, fix)| {
            let mut ex = Example::new("u", 0);
            for (info, v) in KNOWN_LABELS.iter().zip(values) {
                ex.set_label(info.canonical, v);
            }
            if let Some((dlat, dlon, acc)) = fix {
                ex.sensor_data.location = Some(LocationSeries {
                    updates: vec![LocationUpdate {
                        relative_time: 0.0,
                        latitude: Some(32.88 + dlat),
                        longitude: Some(-117.23 + dlon),
                        horizontal_accuracy: Some(acc),
                        ..Default::default()
                    }],
                    quick_features: None,
                });
            }
            ex
        })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn colabel_rules_are_idempotent(ex in example_strategy()) {
        let mut ex = ex;
        let first = adjust_label_by_colabels(&ex);
        apply_updates(&mut ex, &first);
        prop_assert!(adjust_label_by_colabels(&ex).is_empty());
    }

    #[test]
    fn cleaning_twice_changes_nothing_more(exs in prop::collection::vec(example_strategy(), 1..8)) {
        let anchors = AnchorSet::parse("u home 32.88 -117.23\nu main_workplace 32.8805 -117.2305\n* beach_region 32.879 -117.231 32.8802 -117.2298\n").unwrap();
        let exs: Vec<Example> = exs.into_iter().enumerate().map(|(i, mut e)| { e.timestamp = i as i64; e }).collect();
        let mut d = Dataset::new(exs, KNOWN_LABELS.iter().map(|l| l.canonical.to_string()).collect());
        clean_dataset(&mut d, Some(&anchors));
        let snapshot = d.clone();
        prop_assert_eq!(clean_dataset(&mut d, Some(&anchors)), 0);
        prop_assert_eq!(d, snapshot);
    }

    #[test]
    fn walking_is_off_when_riding(ex in example_strategy()) {
        let mut ex = ex;
        ex.set_label(labels::IN_A_CAR, LabelValue::Relevant);
        let updates = adjust_label_by_colabels(&ex);
        apply_updates(&mut ex, &updates);
        prop_assert_eq!(ex.label(labels::WALKING), LabelValue::NotRelevant);
        prop_assert_eq!(ex.label(labels::RUNNING), LabelValue::NotRelevant);
        prop_assert_eq!(ex.label(labels::AT_A_RESTAURANT), LabelValue::NotRelevant);
    }
}
