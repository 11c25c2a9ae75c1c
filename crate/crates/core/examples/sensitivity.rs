//! Score partial assignments by how much of the prediction variance they
//! leave (upsilon) and by the mean risk they induce (lambda).

use ebco::dataset::{generate_synthetic, SyntheticSpec};
use ebco::model::{train, TrainConfig};
use ebco::sensitivity::SensitivityContext;
use ebco::Assignment;

fn main() -> Result<(), ebco::Error> {
    let (ds, truth) = generate_synthetic(&SyntheticSpec::default(), 5)?;
    let model = train(&ds, &TrainConfig { seed: 5, ..TrainConfig::default() })?;
    let ctx = SensitivityContext::new(&model, &ds)?;

    let mut candidates = vec![Assignment::new()];
    let mut partial = Assignment::new();
    for (name, value) in truth.assignment.iter() {
        partial.insert(name, value.clone());
        candidates.push(partial.clone());
    }
    let full: Assignment = ds
        .schema()
        .features
        .iter()
        .map(|f| (f.name.clone(), ds.raw()[0][ds.schema().feature_index(&f.name).unwrap()].clone()))
        .collect();
    candidates.push(full);

    println!("{:<28} {:>24} {:>24}", "assignment", "upsilon", "lambda");
    for a in &candidates {
        let s = ctx.score(a)?;
        let label = if a.is_empty() { "(none)".to_string() } else { a.to_string() };
        println!("{label:<28} {:>24} {:>24}", fmt(&s.upsilon), fmt(&s.lambda));
    }
    Ok(())
}

fn fmt(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.3}")).collect::<Vec<_>>().join(" ")
}
