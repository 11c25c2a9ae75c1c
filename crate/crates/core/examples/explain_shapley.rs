//! Compare exact Shapley values, their Monte Carlo estimate and DeepSHAP on
//! one sample. All three satisfy efficiency: each label's attributions sum to
//! the prediction minus the mean reference prediction.

use ebco::attribution::{deeplift_multipliers, shapley_exact, shapley_montecarlo, AttributionOptions, ReferenceSet};
use ebco::dataset::{generate_synthetic, SyntheticSpec};
use ebco::model::{train, TrainConfig};
use ndarray::{Array2, Axis};

fn main() -> Result<(), ebco::Error> {
    let (ds, _) = generate_synthetic(&SyntheticSpec::default(), 3)?;
    let model = train(&ds, &TrainConfig { seed: 3, ..TrainConfig::default() })?;
    let refs = ReferenceSet::sample(&ds, 20, 4)?;
    let opts = AttributionOptions::default();
    let x = ds.encoded_row(0);

    let exact = shapley_exact(&model, x, &refs, &opts)?;
    let mc = shapley_montecarlo(&model, x, &refs, 500, 5, &opts)?;
    let mut deep = Array2::zeros(exact.raw_dim());
    for r in refs.rows().rows() {
        deep += &deeplift_multipliers(&model, x, r, &opts)?;
    }
    deep /= refs.len() as f64;

    let names = ds.encoding_map().feature_names();
    println!("sample 0: {:?}", ds.raw()[0]);
    for (l, label) in ds.schema().labels.iter().enumerate() {
        println!("\n{label}");
        println!("{:>8} {:>10} {:>10} {:>10}", "feature", "exact", "mc", "deepshap");
        for (f, name) in names.iter().enumerate() {
            println!("{name:>8} {:>10.5} {:>10.5} {:>10.5}", exact[[f, l]], mc[[f, l]], deep[[f, l]]);
        }
    }

    let fx = model.predict_row(x)?;
    let base = model.predict(refs.rows())?.mean_axis(Axis(0)).unwrap();
    println!();
    for l in 0..ds.n_labels() {
        let gap = fx[l] - base[l];
        println!(
            "label {l}: f(x) - E f(r) = {gap:.6}, exact sum = {:.6}, deepshap sum = {:.6}",
            exact.column(l).sum(),
            deep.column(l).sum()
        );
    }
    Ok(())
}
