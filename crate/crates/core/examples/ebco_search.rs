//! The full pipeline on one dataset: train, attribute, prune, beam search.
//! Prints the search trace and checks the result against brute force.

use ebco::dataset::{generate_synthetic, SyntheticSpec};
use ebco::pipeline::{run_pipeline, PipelineConfig};
use ebco::search::{exhaustive_oracle, kept_domains};

fn main() -> Result<(), ebco::Error> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(2);
    let (ds, truth) = generate_synthetic(&SyntheticSpec::default(), seed)?;
    let cfg = PipelineConfig::default().seeded(seed);
    let run = run_pipeline(&ds, &cfg, None)?;

    println!("feature order: {}", run.ebco.trace.feature_order.join(" "));
    for it in &run.ebco.trace.iterations {
        let lead = &it.beam[0];
        println!(
            "iter {} ({}): {} evals, beam {}, lead {} lambda {:.3?}",
            it.iteration,
            it.feature,
            it.evaluations,
            it.beam.len(),
            lead.assignment,
            lead.lambda
        );
    }

    let best = &run.ebco.best;
    println!("\nbest: {}  Gamma {}  lambda {:.4?}", best.assignment, best.big_gamma, best.lambda);
    println!("planted: {} recovered: {}", truth.assignment, best.assignment.contains_all(&truth.assignment));

    let oracle = exhaustive_oracle(&run.explained.model, &ds, &kept_domains(&run.pruned), &cfg.search)?;
    println!("brute force over the pruned space: {} (same: {})", oracle.assignment, oracle.assignment == best.assignment);
    Ok(())
}
