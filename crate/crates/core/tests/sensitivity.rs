mod common;

use common::*;
use ebco::dataset::{generate_synthetic, SyntheticSpec};
use ebco::model::{mean_prediction, train, TrainConfig};
use ebco::sensitivity::{sensitivity_score, SensitivityContext};
use ebco::Assignment;
use proptest::prelude::*;
use rand::seq::SliceRandom;

#[test]
fn partial_assignment_matches_direct_covariance() {
    for seed in 0..5 {
        let (ds, model) = random_instance(seed, 3, 3, 2);
        let a = Assignment::new().with("f1", "v2");
        let s = sensitivity_score(&model, &ds, &a).unwrap();
        let p = model.predict(ds.encoded()).unwrap();
        let pc = model.predict(ds.encoded_under(&a).unwrap().view()).unwrap();
        for l in 0..2 {
            let want = covariance_ratio(&pc.column(l).to_vec(), &p.column(l).to_vec());
            assert!((s.upsilon[l] - want).abs() < 1e-10);
            assert!((s.lambda[l] - pc.column(l).mean().unwrap()).abs() < 1e-12);
        }
    }
}

#[test]
fn row_order_does_not_matter() {
    let (ds, model) = random_instance(3, 4, 3, 3);
    let mut rows: Vec<usize> = (0..ds.n_samples()).collect();
    rows.shuffle(&mut rng(1));
    let shuffled = ds.subset(&rows).unwrap();
    let a = Assignment::new().with("f0", "v1").with("f3", "v0");
    let x = sensitivity_score(&model, &ds, &a).unwrap();
    let y = sensitivity_score(&model, &shuffled, &a).unwrap();
    for l in 0..3 {
        assert!((x.upsilon[l] - y.upsilon[l]).abs() < 1e-12);
        assert!((x.lambda[l] - y.lambda[l]).abs() < 1e-12);
    }
}

#[test]
fn planted_assignment_lowers_every_label_mean() {
    let (ds, truth) = generate_synthetic(&SyntheticSpec::default(), 13).unwrap();
    let model = train(&ds, &TrainConfig { seed: 13, ..TrainConfig::default() }).unwrap();
    let empty = mean_prediction(&model, &ds, &Assignment::new()).unwrap();
    let planted = mean_prediction(&model, &ds, &truth.assignment).unwrap();
    for (p, e) in planted.iter().zip(&empty) {
        assert!(p < e);
    }
}

#[test]
fn scoring_is_deterministic() {
    let (ds, model) = random_instance(6, 3, 3, 2);
    let ctx = SensitivityContext::new(&model, &ds).unwrap();
    let a = Assignment::new().with("f2", "v0");
    assert_eq!(ctx.score(&a).unwrap(), ctx.score(&a).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn upsilon_respects_cauchy_schwarz(seed in any::<u64>(), f in 0usize..4, v in 0usize..3) {
        let (ds, model) = random_instance(seed, 4, 3, 2);
        let a = Assignment::new().with(format!("f{f}"), format!("v{v}").as_str());
        let s = sensitivity_score(&model, &ds, &a).unwrap();
        let p = model.predict(ds.encoded()).unwrap();
        let pc = model.predict(ds.encoded_under(&a).unwrap().view()).unwrap();
        for l in 0..2 {
            let var = |c: Vec<f64>| {
                let m = c.len() as f64;
                let mean = c.iter().sum::<f64>() / m;
                c.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m
            };
            let bound = (var(pc.column(l).to_vec()) / var(p.column(l).to_vec())).sqrt();
            prop_assert!(s.upsilon[l].abs() <= bound + 1e-12);
            prop_assert!((0.0..=1.0).contains(&s.lambda[l]));
        }
    }
}
