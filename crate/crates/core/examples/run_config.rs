//! Drive a run from a JSON config the way the `ebco` binary does, without
//! touching the filesystem until the end.

use ebco::cli::{cmd_optimize, RunConfig};

fn main() -> Result<(), ebco::Error> {
    let cfg: RunConfig = serde_json::from_str(
        r#"{
            "synthetic": { "n_features": 4, "n_samples": 400 },
            "seed": 9,
            "search": { "zeta": 3, "omega": 0.8 },
            "explain_rows": 200
        }"#,
    )
    .map_err(|e| ebco::Error::Config(e.to_string()))?;

    let (report, outputs) = cmd_optimize(&cfg)?;
    println!("best {} with Gamma {}", report.best.assignment, report.best.big_gamma);
    if let Some(p) = &report.planted {
        println!("planted {} recovered: {}", p.truth.assignment, p.recovered);
    }
    println!("files: {}", outputs.names().collect::<Vec<_>>().join(", "));
    println!("\n{}", outputs.get("plot_lambda.csv").unwrap_or_default());
    Ok(())
}
