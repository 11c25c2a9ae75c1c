//! Draw a synthetic dataset with a planted low-risk assignment and write it
//! to disk in the same layout `ebco synth` uses.
//!
//! ```text
//! cargo run --example synthesize -- /tmp/ebco-synth
//! ```

use std::path::PathBuf;

use ebco::cli::cmd_synth;
use ebco::dataset::{generate_synthetic, SyntheticSpec};

fn main() -> Result<(), ebco::Error> {
    let out = std::env::args().nth(1).map(PathBuf::from);
    let spec = SyntheticSpec {
        n_numeric: 1,
        ..SyntheticSpec::default()
    };

    let (ds, truth) = generate_synthetic(&spec, 7)?;
    println!("{} samples, {} features, {} labels", ds.n_samples(), ds.n_features(), ds.n_labels());
    println!("planted assignment: {}", truth.assignment);
    println!("{} rows match it", truth.n_matching);

    let means = ds.targets().mean_axis(ndarray::Axis(0)).unwrap();
    println!("label prevalence: {means:.3}");

    if let Some(dir) = out {
        cmd_synth(&spec, 7)?.write_to(&dir)?;
        println!("wrote {}", dir.display());
    }
    Ok(())
}
