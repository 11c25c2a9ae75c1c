mod common;

use common::*;
use ebco::attribution::{attribute_rows, AttributionMethod, AttributionOptions, AttributionTensor, ReferenceSet};
use ebco::dataset::{candidate_values, generate_synthetic, Dataset, SyntheticSpec, ValueDomain};
use ebco::model::{train, TrainConfig};
use ebco::pruning::{prune_values, value_relevance};
use ndarray::Array3;
use proptest::prelude::*;
use rand::Rng;

fn instance(seed: u64) -> (Dataset, AttributionTensor) {
    let spec = SyntheticSpec {
        n_features: 3,
        n_numeric: 1,
        n_samples: 60,
        ..SyntheticSpec::default()
    };
    let (ds, _) = generate_synthetic(&spec, seed).unwrap();
    let mut r = rng(seed);
    let rows: Vec<usize> = (0..ds.n_samples()).filter(|i| i % 2 == 0).collect();
    let values = Array3::from_shape_fn((rows.len(), 4, 3), |_| r.gen_range(-0.2..0.2));
    let tensor = AttributionTensor {
        sample_indices: rows,
        values,
        method: AttributionMethod::DeepShap,
        baseline: vec![0.0; 3],
        features: ds.schema().features.iter().map(|f| f.name.clone()).collect(),
        labels: ds.schema().labels.clone(),
    };
    (ds, tensor)
}

/// Max over labels of the mean |attribution| over samples holding each value.
fn independent_relevance(ds: &Dataset, t: &AttributionTensor, d: &ValueDomain) -> Vec<f64> {
    let j = ds.schema().feature_index(&d.feature).unwrap();
    let numeric: Vec<Option<f64>> = d.candidates.iter().map(|v| v.as_number()).collect();
    (0..d.len())
        .map(|k| {
            let members: Vec<usize> = t
                .sample_indices
                .iter()
                .enumerate()
                .filter(|(_, &row)| {
                    let cell = &ds.raw()[row][j];
                    match cell.as_number() {
                        None => *cell == d.candidates[k],
                        Some(x) => {
                            let dist = |c: Option<f64>| (c.unwrap() - x).abs();
                            let best = (0..d.len()).min_by(|&a, &b| dist(numeric[a]).total_cmp(&dist(numeric[b]))).unwrap();
                            best == k
                        }
                    }
                })
                .map(|(s, _)| s)
                .collect();
            if members.is_empty() {
                return 0.0;
            }
            (0..t.labels.len())
                .map(|l| members.iter().map(|&s| t.values[[s, j, l]].abs()).sum::<f64>() / members.len() as f64)
                .fold(0.0, f64::max)
        })
        .collect()
}

#[test]
fn median_threshold_matches_independent_filter() {
    for seed in 0..5 {
        let (ds, t) = instance(seed);
        let domains = candidate_values(&ds, 4);
        let rel: Vec<Vec<f64>> = domains.iter().map(|d| independent_relevance(&ds, &t, d)).collect();
        let mut all: Vec<f64> = rel.iter().flatten().copied().collect();
        all.sort_by(f64::total_cmp);
        let median = all[all.len() / 2];

        let pruned = prune_values(&domains, &t, &ds, median).unwrap();
        let mut kept_total = 0;
        for ((d, p), r) in domains.iter().zip(&pruned).zip(&rel) {
            let want: Vec<usize> = (0..d.len()).filter(|&k| r[k] > median).collect();
            let got: Vec<usize> = p.kept.iter().map(|s| s.index).collect();
            if want.is_empty() {
                assert!(p.guard_applied);
            } else {
                assert_eq!(got, want);
            }
            for s in &p.kept {
                assert!((s.relevance - r[s.index]).abs() < 1e-12);
            }
            kept_total += want.len();
        }
        assert!(kept_total.abs_diff(all.len() / 2) <= 1 + all.len() % 2);
    }
}

#[test]
fn planted_value_outranks_typical_values() {
    let (ds, truth) = generate_synthetic(&SyntheticSpec::default(), 21).unwrap();
    let model = train(&ds, &TrainConfig { seed: 21, ..TrainConfig::default() }).unwrap();
    let refs = ReferenceSet::sample(&ds, 100, 22).unwrap();
    let rows: Vec<usize> = (0..ds.n_samples()).collect();
    let t = attribute_rows(&model, &ds, &rows, &refs, AttributionMethod::DeepShap, &AttributionOptions::default()).unwrap();
    let domains = candidate_values(&ds, 5);
    for l in 0..ds.n_labels() {
        let mut others = Vec::new();
        let mut planted = Vec::new();
        for d in &domains {
            for v in &d.candidates {
                let r = value_relevance(&t, &ds, d, v).unwrap()[l];
                if truth.assignment.get(&d.feature) == Some(v) {
                    planted.push(r);
                } else {
                    others.push(r);
                }
            }
        }
        others.sort_by(f64::total_cmp);
        let median = others[others.len() / 2];
        for p in planted {
            assert!(p > median, "label {l}: planted {p} vs median {median}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pruning_is_monotone_and_partitions(seed in 0u64..1000, d1 in 0.0f64..0.25, d2 in 0.0f64..0.25) {
        let (lo, hi) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let (ds, t) = instance(seed);
        let domains = candidate_values(&ds, 4);
        let a = prune_values(&domains, &t, &ds, lo).unwrap();
        let b = prune_values(&domains, &t, &ds, hi).unwrap();
        for ((d, pa), pb) in domains.iter().zip(&a).zip(&b) {
            let mut idx: Vec<usize> = pa.kept.iter().chain(&pa.dropped).map(|s| s.index).collect();
            idx.sort_unstable();
            prop_assert_eq!(idx, (0..d.len()).collect::<Vec<_>>());
            if !pb.guard_applied {
                for s in &pb.kept {
                    prop_assert!(pa.kept.iter().any(|k| k.index == s.index));
                }
            }
        }
        prop_assert_eq!(&prune_values(&domains, &t, &ds, lo).unwrap(), &a);
    }
}
