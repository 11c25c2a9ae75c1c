//! Attribute every sample with DeepSHAP, then drop candidate values whose
//! mean absolute attribution stays below `delta` for every label.

use ebco::attribution::{attribute_rows, AttributionMethod, AttributionOptions, ReferenceSet};
use ebco::dataset::{candidate_values, generate_synthetic, SyntheticSpec};
use ebco::model::{train, TrainConfig};
use ebco::pruning::prune_values;

fn main() -> Result<(), ebco::Error> {
    let spec = SyntheticSpec {
        n_features: 6,
        n_numeric: 2,
        ..SyntheticSpec::default()
    };
    let (ds, truth) = generate_synthetic(&spec, 11)?;
    let model = train(&ds, &TrainConfig { seed: 11, ..TrainConfig::default() })?;
    let refs = ReferenceSet::sample(&ds, 100, 12)?;
    let rows: Vec<usize> = (0..ds.n_samples()).collect();
    let tensor = attribute_rows(&model, &ds, &rows, &refs, AttributionMethod::DeepShap, &AttributionOptions::default())?;

    println!("planted: {}", truth.assignment);
    println!("mean |attribution| per feature:");
    for (name, v) in tensor.features.iter().zip(tensor.mean_abs_per_feature()) {
        println!("  {name:>4} {v:.4}");
    }

    let domains = candidate_values(&ds, 5);
    for delta in [0.005, 0.02, 0.05] {
        let pruned = prune_values(&domains, &tensor, &ds, delta)?;
        let before: usize = domains.iter().map(|d| d.len()).product();
        let after: usize = pruned.iter().map(|d| d.kept.len()).product();
        println!("\ndelta = {delta}: search space {before} -> {after}");
        for d in &pruned {
            let kept: Vec<String> = d.kept_values().map(|v| v.to_string()).collect();
            let guard = if d.guard_applied { " (guard)" } else { "" };
            println!("  {:>4}: keep {}{guard}", d.feature, kept.join(", "));
        }
    }
    Ok(())
}
