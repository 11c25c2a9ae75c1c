use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ebco::cli::{cmd_compare, cmd_explain, cmd_optimize, cmd_synth, cmd_train, parse_method, seed_table_text, RunConfig};
use ebco::dataset::SyntheticSpec;
use ebco::Error;

#[derive(Parser)]
#[command(name = "ebco", version, about = "Explanation-based multi-label combinatorial optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with a planted assignment.
    Synth(Common),
    /// Train the surrogate network.
    Train(Common),
    /// Attribute predictions to features.
    Explain {
        #[command(flatten)]
        common: Common,
        /// exact, montecarlo or deepshap.
        #[arg(long)]
        method: Option<String>,
    },
    /// Run attribution, pruning and beam search.
    Optimize(Common),
    /// Compare the search against the DP baseline over several seeds.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Number of consecutive seeds.
        #[arg(long)]
        seeds: Option<usize>,
    },
}

fn load(common: &Common) -> Result<RunConfig, Error> {
    let cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig {
            synthetic: Some(SyntheticSpec::default()),
            ..RunConfig::default()
        },
    };
    Ok(cfg.with_overrides(common.seed, common.out.clone()))
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Synth(common) => {
            let cfg = load(&common)?;
            let spec = cfg.synthetic.clone().unwrap_or_default();
            let out = cmd_synth(&spec, cfg.require_seed()?)?;
            out.write_to(cfg.require_out()?)?;
        }
        Command::Train(common) => {
            let cfg = load(&common)?;
            let out = cmd_train(&cfg)?;
            out.write_to(cfg.require_out()?)?;
        }
        Command::Explain { common, method } => {
            let mut cfg = load(&common)?;
            if let Some(m) = method {
                cfg.pipeline.attribution = parse_method(&m)?;
            }
            let out = cmd_explain(&cfg)?;
            out.write_to(cfg.require_out()?)?;
        }
        Command::Optimize(common) => {
            let cfg = load(&common)?;
            let dir = cfg.require_out()?.to_path_buf();
            let (report, out) = cmd_optimize(&cfg)?;
            out.write_to(&dir)?;
            println!("best: {}", report.best.assignment);
            println!("lambda: {:?}", report.best.lambda);
            println!("Gamma: {}  evaluations: {}", report.best.big_gamma, report.comparison.ebco_total_evaluations);
        }
        Command::Compare { common, seeds } => {
            let mut cfg = load(&common)?;
            if let Some(n) = seeds {
                cfg.compare_seeds = n;
            }
            let dir = cfg.require_out()?.to_path_buf();
            let (report, out) = cmd_compare(&cfg)?;
            out.write_to(&dir)?;
            print!("{}", seed_table_text(&report));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
