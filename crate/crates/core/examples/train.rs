//! Fit the multi-label surrogate network and check its fit on a holdout split.

use ebco::dataset::{generate_synthetic, SyntheticSpec};
use ebco::model::{train, TrainConfig};

fn main() -> Result<(), ebco::Error> {
    let (ds, _) = generate_synthetic(&SyntheticSpec::default(), 1)?;
    let cfg = TrainConfig {
        holdout_fraction: 0.2,
        seed: 1,
        ..TrainConfig::default()
    };
    let model = train(&ds, &cfg)?;
    let meta = model.train_meta().expect("trained models carry metadata");
    println!("hidden units: {}", model.hidden());
    println!("loss {:.4} -> {:.4} over {} epochs", meta.initial_loss, meta.final_loss, meta.epochs);
    if let Some(h) = &meta.holdout {
        println!("holdout: {h:?}");
    }

    let p = model.predict(ds.encoded())?;
    let acc = p
        .iter()
        .zip(ds.targets())
        .filter(|(p, y)| (**p >= 0.5) == (**y >= 0.5))
        .count() as f64
        / p.len() as f64;
    println!("training accuracy over all labels: {acc:.3}");
    Ok(())
}
