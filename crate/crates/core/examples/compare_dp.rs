//! EBCO against the exhaustive dynamic-programming baseline over several
//! seeds: evaluations each needs to get within tolerance of the optimum.
//!
//! ```text
//! cargo run --release --example compare_dp -- 10
//! ```

use ebco::dataset::{generate_synthetic, SyntheticSpec};
use ebco::pipeline::{compare_seed, PipelineConfig, REACH_TOLERANCE};

fn main() -> Result<(), ebco::Error> {
    let n: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(5);
    let cfg = PipelineConfig::default();
    let mut not_slower = 0;
    println!("{:>4} {:>9} {:>9} {:>9} {:>6} {:>6}", "seed", "optimum", "ebco", "dp", "ebco@", "dp@");
    for seed in 0..n {
        let (ds, truth) = generate_synthetic(&SyntheticSpec::default(), seed)?;
        let s = compare_seed(&ds, &cfg, seed, Some(&truth.assignment))?.summary;
        not_slower += usize::from(s.ebco_not_slower());
        let at = |v: Option<usize>| v.map_or("-".to_string(), |n| n.to_string());
        println!(
            "{seed:>4} {:>9.4} {:>9.4} {:>9.4} {:>6} {:>6}",
            s.target_objective,
            s.ebco_best.objective,
            s.dp_best.objective,
            at(s.ebco_evaluations_to_reach),
            at(s.dp_evaluations_to_reach)
        );
    }
    println!("EBCO within {REACH_TOLERANCE} using no more evaluations than DP on {not_slower}/{n} seeds");
    Ok(())
}
