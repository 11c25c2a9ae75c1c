//! End-to-end runs: train, attribute, prune, search, and the EBCO-vs-DP
//! comparison on one dataset.

use serde::{Deserialize, Serialize};

use crate::assignment::Assignment;
use crate::attribution::{attribute_rows, AttributionMethod, AttributionOptions, AttributionTensor, ReferenceSet};
use crate::dataset::{candidate_values, Dataset, ValueDomain};
use crate::error::Error;
use crate::model::{train, MlpModel, TrainConfig};
use crate::pruning::{prune_values, PrunedDomain};
use crate::search::{dp_baseline, ebco_search, exhaustive_objective, Candidate, SearchConfig, SearchOutcome, ORACLE_LIMIT};

/// Distance from the optimum at which a method counts as having "reached" it.
pub const REACH_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub train: TrainConfig,
    pub search: SearchConfig,
    pub reference_size: usize,
    pub attribution: AttributionMethod,
    pub attribution_options: AttributionOptions,
    pub grid_size: usize,
    /// Attribute only the first `n` rows; `None` attributes every row.
    pub explain_rows: Option<usize>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            train: TrainConfig::default(),
            search: SearchConfig::default(),
            reference_size: 100,
            attribution: AttributionMethod::DeepShap,
            attribution_options: AttributionOptions::default(),
            grid_size: 5,
            explain_rows: None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if self.grid_size < 2 {
            return Err(Error::Config("grid_size must be at least 2".into()));
        }
        if self.reference_size == 0 {
            return Err(Error::Config("reference_size must be at least 1".into()));
        }
        self.search.validate()?;
        Ok(())
    }

    /// Copy with every stochastic step re-seeded from `seed`.
    pub fn seeded(&self, seed: u64) -> Self {
        let mut cfg = self.clone();
        cfg.train.seed = seed;
        cfg.attribution_options.seed = seed.wrapping_add(2);
        cfg
    }

    fn reference_seed(&self) -> u64 {
        self.train.seed.wrapping_add(1)
    }
}

/// Fitted model plus its reference set.
pub struct Explained {
    pub model: MlpModel,
    pub refs: ReferenceSet,
    pub tensor: AttributionTensor,
}

pub fn explain(dataset: &Dataset, model: MlpModel, cfg: &PipelineConfig) -> Result<Explained, Error> {
    let refs = ReferenceSet::sample(dataset, cfg.reference_size, cfg.reference_seed())?;
    let rows: Vec<usize> = (0..cfg.explain_rows.map_or(dataset.n_samples(), |n| n.min(dataset.n_samples()))).collect();
    let tensor = attribute_rows(&model, dataset, &rows, &refs, cfg.attribution, &cfg.attribution_options)?;
    Ok(Explained { model, refs, tensor })
}

pub struct PipelineRun {
    pub explained: Explained,
    pub domains: Vec<ValueDomain>,
    pub pruned: Vec<PrunedDomain>,
    pub ebco: SearchOutcome,
}

/// Trains (unless a model is supplied), attributes, prunes and searches.
pub fn run_pipeline(dataset: &Dataset, cfg: &PipelineConfig, model: Option<MlpModel>) -> Result<PipelineRun, Error> {
    cfg.validate()?;
    let model = match model {
        Some(m) => {
            if m.encoding_map() != dataset.encoding_map() {
                return Err(Error::Config("model was trained with a different encoding than this dataset".into()));
            }
            m
        }
        None => train(dataset, &cfg.train)?,
    };
    let explained = explain(dataset, model, cfg)?;
    let domains = candidate_values(dataset, cfg.grid_size);
    let pruned = prune_values(&domains, &explained.tensor, dataset, cfg.search.delta)?;
    let ebco = ebco_search(&explained.model, dataset, &explained.tensor, &pruned, &cfg.search)?;
    Ok(PipelineRun {
        explained,
        domains,
        pruned,
        ebco,
    })
}

/// Outcome of running EBCO and DP on the same model and data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedComparison {
    pub seed: u64,
    /// Lowest mean direction-adjusted lambda over all full assignments, when
    /// the space is small enough to enumerate.
    pub oracle_objective: Option<f64>,
    pub oracle_assignment: Option<Assignment>,
    /// Objective the reach counts are measured against.
    pub target_objective: f64,
    pub ebco_best: Candidate,
    pub dp_best: Candidate,
    pub ebco_evaluations_to_reach: Option<usize>,
    pub dp_evaluations_to_reach: Option<usize>,
    pub ebco_total_evaluations: usize,
    pub dp_total_evaluations: usize,
    /// Whether EBCO's best contains every planted binding, when one is known.
    pub planted_recovered: Option<bool>,
}

impl SeedComparison {
    /// EBCO reached the target with no more evaluations than DP.
    pub fn ebco_not_slower(&self) -> bool {
        match (self.ebco_evaluations_to_reach, self.dp_evaluations_to_reach) {
            (Some(e), Some(d)) => e <= d,
            (Some(_), None) => true,
            (None, _) => false,
        }
    }
}

pub struct ComparisonRun {
    pub pipeline: PipelineRun,
    pub dp: SearchOutcome,
    pub summary: SeedComparison,
}

/// Runs the pipeline and the DP baseline on `dataset` under `seed`.
pub fn compare_seed(dataset: &Dataset, cfg: &PipelineConfig, seed: u64, planted: Option<&Assignment>) -> Result<ComparisonRun, Error> {
    let cfg = cfg.seeded(seed);
    let pipeline = run_pipeline(dataset, &cfg, None)?;
    let model = &pipeline.explained.model;
    let dp = dp_baseline(model, dataset, &pipeline.domains, &cfg.search)?;

    let space: Option<usize> = pipeline.domains.iter().try_fold(1usize, |a, d| a.checked_mul(d.len()));
    let oracle = match space {
        Some(n) if n <= ORACLE_LIMIT => Some(exhaustive_objective(model, dataset, &pipeline.domains, &cfg.search)?),
        _ => None,
    };
    let target = oracle
        .as_ref()
        .map_or(pipeline.ebco.best.objective.min(dp.best.objective), |o| o.objective);

    let summary = SeedComparison {
        seed,
        oracle_objective: oracle.as_ref().map(|o| o.objective),
        oracle_assignment: oracle.map(|o| o.assignment),
        target_objective: target,
        ebco_best: pipeline.ebco.best.clone(),
        dp_best: dp.best.clone(),
        ebco_evaluations_to_reach: pipeline.ebco.trace.evaluations_to_reach(target, REACH_TOLERANCE),
        dp_evaluations_to_reach: dp.trace.evaluations_to_reach(target, REACH_TOLERANCE),
        ebco_total_evaluations: pipeline.ebco.trace.total_evaluations(),
        dp_total_evaluations: dp.trace.total_evaluations(),
        planted_recovered: planted.map(|p| pipeline.ebco.best.assignment.contains_all(p)),
    };
    Ok(ComparisonRun { pipeline, dp, summary })
}
