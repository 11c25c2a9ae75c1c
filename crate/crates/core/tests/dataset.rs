mod common;

use ebco::dataset::{
    apply_assignment, candidate_values, generate_synthetic, read_csv, Dataset, DatasetError, FeatureDef, FeatureSchema,
    SyntheticSpec,
};
use ebco::{Assignment, Value};
use proptest::prelude::*;

fn schema() -> FeatureSchema {
    FeatureSchema::new(
        vec![
            FeatureDef::categorical("soil", ["clay", "loam", "sand"]),
            FeatureDef::numeric("ph", 0.0, 14.0),
            FeatureDef::categorical("feed", ["a", "b"]),
        ],
        vec!["salmonella".into(), "listeria".into()],
    )
    .unwrap()
}

prop_compose! {
    fn rows(max: usize)(n in 1..max)(
        cats in proptest::collection::vec((0usize..3, 0.0f64..14.0, 0usize..2, 0u8..2, 0u8..2), n)
    ) -> (Vec<Vec<Value>>, Vec<Vec<u8>>) {
        let soils = ["clay", "loam", "sand"];
        let feeds = ["a", "b"];
        cats.into_iter()
            .map(|(s, ph, f, y0, y1)| (vec![soils[s].into(), Value::Number(ph), feeds[f].into()], vec![y0, y1]))
            .unzip()
    }
}

fn naive_quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

proptest! {
    #[test]
    fn csv_round_trip_reproduces_cells((raw, targets) in rows(40)) {
        let ds = Dataset::from_raw(schema(), raw, targets).unwrap();
        let text = ds.to_csv_string();
        let back = read_csv(text.as_bytes(), &schema()).unwrap();
        prop_assert_eq!(back.raw(), ds.raw());
        prop_assert_eq!(back.targets(), ds.targets());
        prop_assert_eq!(back.to_csv_string(), text);
    }

    #[test]
    fn encoding_invariants((raw, targets) in rows(40)) {
        let ds = Dataset::from_raw(schema(), raw, targets).unwrap();
        let map = ds.encoding_map();
        for (j, enc) in map.features.iter().enumerate() {
            let cols = enc.columns();
            if ds.schema().features[j].is_categorical() {
                for row in ds.encoded().rows() {
                    let s: f64 = cols.clone().map(|c| row[c]).sum();
                    prop_assert_eq!(s, 1.0);
                }
            } else {
                let col = ds.encoded().column(cols.start).to_vec();
                let m = col.len() as f64;
                let mean = col.iter().sum::<f64>() / m;
                let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m).sqrt();
                let raw: Vec<f64> = ds.raw().iter().map(|r| r[j].as_number().unwrap()).collect();
                let constant = raw.iter().all(|v| *v == raw[0]);
                if constant {
                    prop_assert!(col.iter().all(|v| *v == 0.0));
                } else {
                    prop_assert!(mean.abs() < 1e-9);
                    prop_assert!((sd - 1.0).abs() < 1e-6);
                }
            }
        }
    }

    #[test]
    fn assignment_is_idempotent((raw, targets) in rows(30), soil in 0usize..3, ph in 0.0f64..14.0) {
        let ds = Dataset::from_raw(schema(), raw, targets).unwrap();
        let a = Assignment::new().with("soil", ["clay", "loam", "sand"][soil]).with("ph", ph);
        let once = apply_assignment(&ds, &a).unwrap();
        let twice = apply_assignment(&once, &a).unwrap();
        prop_assert_eq!(once.raw(), twice.raw());
        prop_assert_eq!(once.encoded(), twice.encoded());
        let direct = ds.encoded_under(&a).unwrap();
        prop_assert_eq!(once.encoded(), direct.view());
    }

    #[test]
    fn full_assignment_gives_identical_rows((raw, targets) in rows(30)) {
        let ds = Dataset::from_raw(schema(), raw, targets).unwrap();
        let a = Assignment::new().with("soil", "loam").with("ph", 7.0).with("feed", "b");
        let x = ds.encoded_under(&a).unwrap();
        for row in x.rows() {
            prop_assert_eq!(row, x.row(0));
        }
    }

    #[test]
    fn numeric_grid_matches_linear_interpolation(values in proptest::collection::vec(0.0f64..14.0, 2..60), q in 2usize..9) {
        let raw: Vec<Vec<Value>> = values.iter().map(|&v| vec!["clay".into(), Value::Number(v), "a".into()]).collect();
        let targets = vec![vec![0, 0]; raw.len()];
        let ds = Dataset::from_raw(schema(), raw, targets).unwrap();
        let got = &candidate_values(&ds, q)[1];
        let mut sorted = values.clone();
        sorted.sort_by(f64::total_cmp);
        let mut want: Vec<f64> = (0..q).map(|k| naive_quantile(&sorted, k as f64 / (q - 1) as f64)).collect();
        want.dedup();
        let got: Vec<f64> = got.candidates.iter().map(|v| v.as_number().unwrap()).collect();
        prop_assert_eq!(got.len(), want.len());
        for (a, b) in got.iter().zip(&want) {
            prop_assert!((a - b).abs() < 1e-9);
        }
        prop_assert!(got.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn three_row_one_hot() {
    let s = FeatureSchema::new(vec![FeatureDef::categorical("f", ["a", "b"])], vec!["y".into()]).unwrap();
    let ds = read_csv("f,label:y\na,0\nb,1\na,1\n".as_bytes(), &s).unwrap();
    assert_eq!(ds.n_samples(), 3);
    assert_eq!(ds.width(), 2);
    for row in ds.encoded().rows() {
        assert_eq!(row.sum(), 1.0);
    }
}

#[test]
fn unknown_category_is_rejected() {
    let s = FeatureSchema::new(vec![FeatureDef::categorical("f", ["a", "b"])], vec!["y".into()]).unwrap();
    let err = read_csv("f,label:y\na,0\nc,1\n".as_bytes(), &s).unwrap_err();
    assert!(matches!(err, DatasetError::UnknownCategory { row: 1, .. }), "{err:?}");
}

#[test]
fn standardization_by_hand() {
    let s = FeatureSchema::new(vec![FeatureDef::numeric("x", 0.0, 10.0)], vec!["y".into()]).unwrap();
    let ds = read_csv("x,label:y\n1,0\n2,1\n3,1\n".as_bytes(), &s).unwrap();
    let sd = (2.0f64 / 3.0).sqrt();
    let col = ds.encoded().column(0).to_vec();
    for (got, raw) in col.iter().zip([1.0, 2.0, 3.0]) {
        assert!((got - (raw - 2.0) / sd).abs() < 1e-12);
    }
    assert!((col[2] - 1.2247).abs() < 1e-4);

    let fixed = ds.encoded_under(&Assignment::new().with("x", 5.0)).unwrap();
    for v in fixed.column(0) {
        assert!((v - (5.0 - 2.0) / sd).abs() < 1e-12);
    }
}

#[test]
fn quantile_grid_on_one_to_hundred() {
    let s = FeatureSchema::new(vec![FeatureDef::numeric("x", 0.0, 200.0)], vec!["y".into()]).unwrap();
    let raw = (1..=100).map(|i| vec![Value::Number(i as f64)]).collect();
    let ds = Dataset::from_raw(s, raw, vec![vec![0]; 100]).unwrap();
    let got: Vec<f64> = candidate_values(&ds, 5)[0].candidates.iter().map(|v| v.as_number().unwrap()).collect();
    for (a, b) in got.iter().zip([1.0, 25.75, 50.5, 75.25, 100.0]) {
        assert!((a - b).abs() < 0.5);
    }
}

#[test]
fn planted_rows_have_lower_label_rates() {
    let spec = SyntheticSpec {
        n_features: 4,
        ..SyntheticSpec::default()
    };
    let (ds, truth) = generate_synthetic(&spec, 7).unwrap();
    assert_eq!(truth.assignment.len(), 2);
    let bindings = ds.resolve(&truth.assignment).unwrap();
    for l in 0..ds.n_labels() {
        let (mut hit, mut hit_pos, mut miss, mut miss_pos) = (0.0, 0.0, 0.0, 0.0);
        for (row, t) in ds.raw().iter().zip(ds.targets().rows()) {
            if bindings.iter().all(|(j, v)| &row[*j] == v) {
                hit += 1.0;
                hit_pos += t[l];
            } else {
                miss += 1.0;
                miss_pos += t[l];
            }
        }
        assert!(hit_pos / hit < miss_pos / miss);
    }
}

#[test]
fn synthetic_output_is_reproducible() {
    let spec = SyntheticSpec::default();
    let (a, ta) = generate_synthetic(&spec, 3).unwrap();
    let (b, tb) = generate_synthetic(&spec, 3).unwrap();
    assert_eq!(a.to_csv_string(), b.to_csv_string());
    assert_eq!(ta, tb);
    let (c, _) = generate_synthetic(&spec, 4).unwrap();
    assert_ne!(a.to_csv_string(), c.to_csv_string());
}
