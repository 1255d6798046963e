//! Round-trip and schema properties of the on-disk formats.

mod common;

use std::sync::Arc;

use ndarray::{Array1, Array2, Array3};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tempfile::tempdir;

use imagestar::image_star::ImageStar;
use imagestar::io::{
    load_image, load_network, save_image, save_network, save_report, AttackParams,
    CounterexampleRef, LabelRange, Report,
};
use imagestar::layers::{FcLayer, Layer};
use imagestar::network::{Network, Scheme};
use imagestar::robustness::{verify_robustness, Verdict};
use imagestar::star::Predicate;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn image_csv_round_trips(
        h in 1usize..4,
        w in 1usize..4,
        nc in 1usize..3,
        seed in any::<u32>(),
    ) {
        let vals: Vec<f64> = {
            use rand::Rng;
            let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
            (0..h * w * nc).map(|_| rng.random_range(-1e6..=1e6)).collect()
        };
        let image = Array3::from_shape_vec((h, w, nc), vals).unwrap();
        let dir = tempdir().unwrap();
        let path = dir.path().join("img.csv");
        save_image(&image, &path).unwrap();
        let loaded: Array3<f64> = load_image(&path).unwrap();
        prop_assert_eq!(image, loaded);
    }

    #[test]
    fn network_json_round_trips(rows in 1usize..4, cols in 1usize..5, seed in any::<u32>()) {
        let (w, b) = {
            use rand::Rng;
            let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
            (
                Array2::from_shape_fn((rows, cols), |_| rng.random_range(-10.0..=10.0)),
                Array1::from_iter((0..rows).map(|_| rng.random_range(-10.0..=10.0))),
            )
        };
        let net = Network::new(
            vec![Layer::Fc(FcLayer::new(w, b).unwrap())],
            (1, cols, 1),
            vec![],
        )
        .unwrap();
        let dir = tempdir().unwrap();
        let first = dir.path().join("a.json");
        save_network(&net, &first).unwrap();
        let loaded: Network<f64> = load_network(&first).unwrap();
        let second = dir.path().join("b.json");
        save_network(&loaded, &second).unwrap();
        // Stable bytes after one normalization pass, and identical weights.
        prop_assert_eq!(
            std::fs::read_to_string(&first).unwrap(),
            std::fs::read_to_string(&second).unwrap()
        );
        match (&net.layers()[0], &loaded.layers()[0]) {
            (Layer::Fc(a), Layer::Fc(b)) => {
                prop_assert_eq!(a.weights(), b.weights());
                prop_assert_eq!(a.bias(), b.bias());
            }
            _ => prop_assert!(false, "layer kind changed"),
        }
    }
}

/// Minimal structural validator for the subset of JSON Schema used by
/// `docs/report.schema.json`: `type`, `required`, `properties`, `items`,
/// `enum`, `minimum`. Independent of serde's typed deserialization.
fn validate_against_schema(value: &serde_json::Value, schema: &serde_json::Value) -> Vec<String> {
    let mut errors = Vec::new();
    check(value, schema, "$", &mut errors);
    return errors;

    fn check(
        value: &serde_json::Value,
        schema: &serde_json::Value,
        path: &str,
        errors: &mut Vec<String>,
    ) {
        use serde_json::Value;
        if let Some(ty) = schema.get("type").and_then(Value::as_str) {
            let ok = match ty {
                "object" => value.is_object(),
                "array" => value.is_array(),
                "string" => value.is_string(),
                "number" => value.is_number(),
                "integer" => value.is_u64() || value.is_i64(),
                _ => true,
            };
            if !ok {
                errors.push(format!("{path}: expected {ty}"));
                return;
            }
        }
        if let Some(allowed) = schema.get("enum").and_then(Value::as_array) {
            if !allowed.contains(value) {
                errors.push(format!("{path}: {value} not in enum"));
            }
        }
        if let Some(min) = schema.get("minimum").and_then(Value::as_f64) {
            if let Some(v) = value.as_f64() {
                if v < min {
                    errors.push(format!("{path}: {v} below minimum {min}"));
                }
            }
        }
        if let Some(required) = schema.get("required").and_then(Value::as_array) {
            for key in required.iter().filter_map(Value::as_str) {
                if value.get(key).is_none() {
                    errors.push(format!("{path}: missing required field {key}"));
                }
            }
        }
        if let Some(props) = schema.get("properties").and_then(Value::as_object) {
            if let Some(obj) = value.as_object() {
                for (key, sub) in props {
                    if let Some(v) = obj.get(key) {
                        check(v, sub, &format!("{path}.{key}"), errors);
                    }
                }
            }
        }
        if let Some(items) = schema.get("items") {
            if let Some(arr) = value.as_array() {
                for (i, v) in arr.iter().enumerate() {
                    check(v, items, &format!("{path}[{i}]"), errors);
                }
            }
        }
    }
}

#[test]
fn report_validates_against_published_schema() {
    let report = Report {
        verdict: "NotRobust".into(),
        scheme: "exact".into(),
        target_label: "zero".into(),
        attack: AttackParams {
            kind: "brightening".into(),
            d: Some(240.0),
            delta: Some(0.05),
            l: None,
            delta_max: None,
        },
        stars_per_layer: vec![1, 3, 3],
        lp_calls: 42,
        elapsed_seconds: 0.125,
        output_ranges: vec![
            LabelRange {
                label: "zero".into(),
                lo: -1.0,
                hi: 0.5,
            },
            LabelRange {
                label: "one".into(),
                lo: 0.0,
                hi: 2.0,
            },
        ],
        counterexamples: vec![CounterexampleRef {
            path: "report.cex0.csv".into(),
            predicted_label: "one".into(),
        }],
    };
    let dir = tempdir().unwrap();
    let path = dir.path().join("report.json");
    save_report(&report, &path).unwrap();
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    let schema_path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/report.schema.json");
    let schema: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(schema_path).unwrap()).unwrap();
    let errors = validate_against_schema(&value, &schema);
    assert!(errors.is_empty(), "schema violations: {errors:?}");
}

#[test]
fn label_ranges_contain_sampled_outputs() {
    // The ranges written for plotting must contain every sampled concrete
    // output, per label, under both schemes.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (net, input) = common::random_instance(&mut rng, 2);
    for scheme in [Scheme::Exact, Scheme::Approx] {
        let reach = net.reach(&input, scheme).unwrap();
        let ranges = imagestar::network::output_ranges(&reach.output_sets).unwrap();
        for x in input.sample(50, 9).unwrap() {
            let logits = net.eval(&x).unwrap();
            for (i, &(lo, hi)) in ranges.iter().enumerate() {
                assert!(
                    logits[i] >= lo - 1e-7 && logits[i] <= hi + 1e-7,
                    "label {i} value {} outside [{lo}, {hi}] under {:?}",
                    logits[i],
                    scheme
                );
            }
        }
    }
}

#[test]
fn verdicts_are_deterministic_across_runs() {
    let net = Network::new(
        vec![Layer::Fc(FcLayer::identity(2))],
        (1, 2, 1),
        vec!["a".into(), "b".into()],
    )
    .unwrap();
    let input = ImageStar::from_parts(
        ndarray::array![[[1.0], [0.0]]],
        &[ndarray::array![[[0.0], [1.0]]]],
        Arc::new(Predicate::from_box(&[0.0], &[2.0]).unwrap()),
    )
    .unwrap();
    let a = verify_robustness(&net, &input, 0, Scheme::Exact).unwrap();
    let b = verify_robustness(&net, &input, 0, Scheme::Exact).unwrap();
    assert_eq!(a.verdict, Verdict::NotRobust);
    assert_eq!(a.verdict, b.verdict);
    assert_eq!(a.counterexamples.len(), b.counterexamples.len());
    for (x, y) in a.counterexamples.iter().zip(&b.counterexamples) {
        assert_eq!(x.image, y.image);
        assert_eq!(x.predicted, y.predicted);
    }
}
