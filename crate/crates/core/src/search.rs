//! Search over feature-value assignments.
//!
//! [`ebco_search`] walks features one at a time (most relevant first by
//! default), extends every beam member with every kept value of the current
//! feature, scores each extension and keeps the best `zeta`. Scoring:
//!
//! ```text
//! gamma_l = omega * (1 - lambda_l) + (1 - omega) * upsilon_l   (minimised label)
//! gamma_l = omega * lambda_l       + (1 - omega) * upsilon_l   (maximised label)
//! Gamma   = sum_l [gamma_l >= rho] * rho        (as written)
//!         | sum_l [gamma_l >= rho] * gamma_l    (passthrough)
//! ```
//!
//! Candidates are ranked by Gamma (descending), then by the mean
//! direction-adjusted lambda (ascending), then lexicographically by
//! `(feature name, value index)`. The same ordering is used by the beam, by
//! the final pick, and by [`exhaustive_oracle`].
//!
//! [`dp_baseline`] and [`exhaustive_objective`] ignore Gamma and minimise the
//! mean direction-adjusted lambda directly.
//!
//! Evaluation counts measure model work: one evaluation is one candidate's
//! batch prediction over all `m` samples.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::{Assignment, Value};
use crate::attribution::AttributionTensor;
use crate::dataset::{Dataset, ValueDomain};
use crate::model::MlpModel;
use crate::pruning::PrunedDomain;
use crate::sensitivity::{SensitivityContext, SensitivityError};
use crate::FORMAT_VERSION;

/// Upper bound on the number of full assignments [`exhaustive_oracle`] enumerates.
pub const ORACLE_LIMIT: usize = 100_000;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("invalid search config: {0}")]
    InvalidConfig(String),
    #[error("feature '{0}' has no candidate values")]
    EmptyDomain(String),
    #[error("unknown feature '{0}'")]
    UnknownFeature(String),
    #[error("DP table exceeded its capacity at stage {stage}")]
    CapacityExceeded { stage: usize },
    #[error("search space of {size} assignments exceeds the oracle limit")]
    SpaceTooLarge { size: String },
    #[error(transparent)]
    Sensitivity(#[from] SensitivityError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum GammaMode {
    /// Every passing objective contributes exactly `rho`.
    #[default]
    AsWritten,
    /// Every passing objective contributes its own `gamma`.
    Passthrough,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FeatureOrder {
    /// Descending mean |attribution| over samples and labels.
    #[default]
    Relevance,
    Schema,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Pruning threshold.
    pub delta: f64,
    /// Weight of objective attainment against sensitivity, in [0, 1].
    pub omega: f64,
    /// Penalisation threshold.
    pub rho: f64,
    /// Beam width.
    pub zeta: usize,
    /// One direction for every label, or one per label.
    pub direction: Vec<Direction>,
    pub feature_order: FeatureOrder,
    pub gamma_mode: GammaMode,
    /// Maximum DP table size; `None` is unbounded.
    pub dp_capacity: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            delta: 0.01,
            omega: 0.9,
            rho: 0.5,
            zeta: 5,
            direction: vec![Direction::Minimize],
            feature_order: FeatureOrder::Relevance,
            gamma_mode: GammaMode::AsWritten,
            dp_capacity: None,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::InvalidConfig(m.to_string()));
        if !(0.0..=1.0).contains(&self.omega) {
            return bad("omega must lie in [0, 1]");
        }
        if !(self.rho >= 0.0 && self.rho.is_finite()) {
            return bad("rho must be finite and non-negative");
        }
        if self.delta.is_nan() || self.delta < 0.0 {
            return bad("delta must be non-negative");
        }
        if self.zeta == 0 {
            return bad("zeta must be at least 1");
        }
        if self.direction.is_empty() {
            return bad("direction must name at least one label direction");
        }
        Ok(())
    }

    /// Per-label directions, broadcasting a single entry.
    pub fn directions(&self, n_labels: usize) -> Result<Vec<Direction>, SearchError> {
        match self.direction.len() {
            1 => Ok(vec![self.direction[0]; n_labels]),
            k if k == n_labels => Ok(self.direction.clone()),
            k => Err(SearchError::InvalidConfig(format!("{k} directions given for {n_labels} labels"))),
        }
    }
}

/// Per-label selection score `gamma`.
pub fn selection_gamma(lambda: &[f64], upsilon: &[f64], omega: f64, directions: &[Direction]) -> Vec<f64> {
    lambda
        .iter()
        .zip(upsilon)
        .zip(directions)
        .map(|((&lam, &ups), dir)| {
            let attainment = match dir {
                Direction::Minimize => 1.0 - lam,
                Direction::Maximize => lam,
            };
            omega * attainment + (1.0 - omega) * ups
        })
        .collect()
}

/// Combined score `Gamma`: objectives with `gamma < rho` contribute nothing.
pub fn penalized_score(gamma: &[f64], rho: f64, mode: GammaMode) -> f64 {
    gamma
        .iter()
        .map(|&g| match (g < rho, mode) {
            (true, _) => 0.0,
            (false, GammaMode::AsWritten) => rho,
            (false, GammaMode::Passthrough) => g,
        })
        .sum()
}

/// Mean of `lambda_l` over minimised labels and `1 - lambda_l` over maximised ones.
pub fn adjusted_objective(lambda: &[f64], directions: &[Direction]) -> f64 {
    let total: f64 = lambda
        .iter()
        .zip(directions)
        .map(|(&lam, dir)| match dir {
            Direction::Minimize => lam,
            Direction::Maximize => 1.0 - lam,
        })
        .sum();
    total / lambda.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub assignment: Assignment,
    pub gamma: Vec<f64>,
    pub big_gamma: f64,
    pub lambda: Vec<f64>,
    pub upsilon: Vec<f64>,
    /// Mean direction-adjusted lambda; lower is better.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub feature: String,
    /// Candidates retained after this iteration, best first.
    pub beam: Vec<Candidate>,
    /// Lambda of the retained candidate with the lowest objective.
    pub best_lambda: Vec<f64>,
    pub best_objective: f64,
    /// Gamma of the top-ranked retained candidate.
    pub best_big_gamma: f64,
    pub evaluations: usize,
    pub cumulative_evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchTrace {
    pub spec_version: String,
    pub method: String,
    pub labels: Vec<String>,
    pub feature_order: Vec<String>,
    pub iterations: Vec<IterationRecord>,
}

impl SearchTrace {
    fn new(method: &str, labels: Vec<String>, feature_order: Vec<String>) -> Self {
        Self {
            spec_version: FORMAT_VERSION.to_string(),
            method: method.to_string(),
            labels,
            feature_order,
            iterations: Vec::new(),
        }
    }

    pub fn total_evaluations(&self) -> usize {
        self.iterations.last().map_or(0, |r| r.cumulative_evaluations)
    }

    /// Cumulative evaluations at the first iteration whose running best
    /// objective is within `tolerance` of `target`.
    pub fn evaluations_to_reach(&self, target: f64, tolerance: f64) -> Option<usize> {
        let mut best = f64::INFINITY;
        for r in &self.iterations {
            best = best.min(r.best_objective);
            if best <= target + tolerance {
                return Some(r.cumulative_evaluations);
            }
        }
        None
    }

    /// `(cumulative evaluations, running best objective)` per iteration.
    pub fn objective_series(&self) -> Vec<(usize, f64)> {
        let mut best = f64::INFINITY;
        self.iterations
            .iter()
            .map(|r| {
                best = best.min(r.best_objective);
                (r.cumulative_evaluations, best)
            })
            .collect()
    }

    /// One row per retained candidate per iteration.
    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header: Vec<String> = ["iteration", "feature", "rank", "assignment"].iter().map(|s| s.to_string()).collect();
        for prefix in ["lambda", "upsilon", "gamma"] {
            header.extend(self.labels.iter().map(|l| format!("{prefix}:{l}")));
        }
        header.extend(["big_gamma", "objective", "cumulative_evaluations"].iter().map(|s| s.to_string()));
        w.write_record(&header).expect("in-memory write");
        for r in &self.iterations {
            for (rank, c) in r.beam.iter().enumerate() {
                let mut row = vec![r.iteration.to_string(), r.feature.clone(), rank.to_string(), c.assignment.to_string()];
                for v in c.lambda.iter().chain(&c.upsilon).chain(&c.gamma) {
                    row.push(v.to_string());
                }
                row.push(c.big_gamma.to_string());
                row.push(c.objective.to_string());
                row.push(r.cumulative_evaluations.to_string());
                w.write_record(&row).expect("in-memory write");
            }
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub best: Candidate,
    pub trace: SearchTrace,
}

/// A candidate plus its tie-break key.
#[derive(Debug, Clone)]
struct Scored {
    candidate: Candidate,
    /// `(feature name, value index)` sorted by feature name.
    key: Vec<(String, usize)>,
}

fn rank_by_gamma(a: &Scored, b: &Scored) -> Ordering {
    b.candidate
        .big_gamma
        .total_cmp(&a.candidate.big_gamma)
        .then(a.candidate.objective.total_cmp(&b.candidate.objective))
        .then_with(|| a.key.cmp(&b.key))
}

fn rank_by_objective(a: &Scored, b: &Scored) -> Ordering {
    a.candidate
        .objective
        .total_cmp(&b.candidate.objective)
        .then_with(|| a.key.cmp(&b.key))
}

/// One feature as the search sees it: schema column and `(value, index)` options.
#[derive(Debug, Clone)]
struct SearchFeature {
    name: String,
    column: usize,
    options: Vec<(Value, usize)>,
}

/// A partial assignment under construction.
#[derive(Debug, Clone, Default)]
struct Partial {
    bindings: Vec<(usize, Value)>,
    key: Vec<(String, usize)>,
}

impl Partial {
    fn extend(&self, feature: &SearchFeature, value: &Value, index: usize) -> Self {
        let mut next = self.clone();
        next.bindings.push((feature.column, value.clone()));
        let pos = next.key.partition_point(|(n, _)| n < &feature.name);
        next.key.insert(pos, (feature.name.clone(), index));
        next
    }

    fn assignment(&self, dataset: &Dataset) -> Assignment {
        self.bindings
            .iter()
            .map(|(j, v)| (dataset.schema().features[*j].name.clone(), v.clone()))
            .collect()
    }
}

/// Turns an assignment into a scored candidate.
struct Scorer<'a> {
    ctx: SensitivityContext<'a>,
    config: &'a SearchConfig,
    directions: Vec<Direction>,
}

impl<'a> Scorer<'a> {
    fn new(model: &'a MlpModel, dataset: &'a Dataset, config: &'a SearchConfig) -> Result<Self, SearchError> {
        config.validate()?;
        let directions = config.directions(dataset.n_labels())?;
        Ok(Self {
            ctx: SensitivityContext::new(model, dataset)?,
            config,
            directions,
        })
    }

    fn score(&self, partial: &Partial) -> Scored {
        let assignment = partial.assignment(self.ctx.dataset());
        let s = self.ctx.score_resolved(assignment, &partial.bindings);
        let gamma = selection_gamma(&s.lambda, &s.upsilon, self.config.omega, &self.directions);
        let big_gamma = penalized_score(&gamma, self.config.rho, self.config.gamma_mode);
        let objective = adjusted_objective(&s.lambda, &self.directions);
        Scored {
            candidate: Candidate {
                assignment: s.assignment,
                gamma,
                big_gamma,
                lambda: s.lambda,
                upsilon: s.upsilon,
                objective,
            },
            key: partial.key.clone(),
        }
    }

    fn score_all(&self, partials: &[Partial]) -> Vec<Scored> {
        partials.par_iter().map(|p| self.score(p)).collect()
    }

    fn labels(&self) -> Vec<String> {
        self.ctx.dataset().schema().labels.clone()
    }
}

fn resolve_features<'d>(
    dataset: &Dataset,
    domains: impl Iterator<Item = (&'d str, Vec<(Value, usize)>)>,
) -> Result<Vec<SearchFeature>, SearchError> {
    domains
        .map(|(name, options)| {
            let column = dataset
                .schema()
                .feature_index(name)
                .ok_or_else(|| SearchError::UnknownFeature(name.to_string()))?;
            if options.is_empty() {
                return Err(SearchError::EmptyDomain(name.to_string()));
            }
            for (v, _) in &options {
                if !dataset.schema().features[column].admits(v) {
                    return Err(SearchError::InvalidConfig(format!("value {v} is outside the domain of '{name}'")));
                }
            }
            Ok(SearchFeature {
                name: name.to_string(),
                column,
                options,
            })
        })
        .collect()
}

fn pruned_features(dataset: &Dataset, domains: &[PrunedDomain]) -> Result<Vec<SearchFeature>, SearchError> {
    resolve_features(
        dataset,
        domains
            .iter()
            .map(|d| (d.feature.as_str(), d.kept.iter().map(|s| (s.value.clone(), s.index)).collect())),
    )
}

fn plain_features(dataset: &Dataset, domains: &[ValueDomain]) -> Result<Vec<SearchFeature>, SearchError> {
    resolve_features(
        dataset,
        domains
            .iter()
            .map(|d| (d.feature.as_str(), d.candidates.iter().cloned().zip(0..).collect())),
    )
}

fn record(iteration: usize, feature: &str, beam: &[Scored], evaluations: usize, cumulative: usize) -> IterationRecord {
    let best_obj = beam
        .iter()
        .min_by(|a, b| rank_by_objective(a, b))
        .expect("beam is nonempty");
    IterationRecord {
        iteration,
        feature: feature.to_string(),
        beam: beam.iter().map(|s| s.candidate.clone()).collect(),
        best_lambda: best_obj.candidate.lambda.clone(),
        best_objective: best_obj.candidate.objective,
        best_big_gamma: beam[0].candidate.big_gamma,
        evaluations,
        cumulative_evaluations: cumulative,
    }
}

/// Beam search guided by attributions and sensitivity.
///
/// Visits every domain once, in the configured order, so the final beam holds
/// full assignments over the given features.
pub fn ebco_search(
    model: &MlpModel,
    dataset: &Dataset,
    tensor: &AttributionTensor,
    domains: &[PrunedDomain],
    config: &SearchConfig,
) -> Result<SearchOutcome, SearchError> {
    let scorer = Scorer::new(model, dataset, config)?;
    let mut features = pruned_features(dataset, domains)?;
    if features.is_empty() {
        return Err(SearchError::InvalidConfig("no features to search".into()));
    }
    match config.feature_order {
        FeatureOrder::Schema => features.sort_by_key(|f| f.column),
        FeatureOrder::Relevance => {
            let rel = tensor.mean_abs_per_feature();
            let score = |f: &SearchFeature| tensor.feature_index(&f.name).map_or(0.0, |i| rel[i]);
            features.sort_by(|a, b| score(b).total_cmp(&score(a)).then(a.column.cmp(&b.column)));
        }
    }

    let mut trace = SearchTrace::new("ebco", scorer.labels(), features.iter().map(|f| f.name.clone()).collect());
    let mut beam: Vec<Partial> = vec![Partial::default()];
    let mut best = None;
    let mut cumulative = 0;
    for (it, feature) in features.iter().enumerate() {
        let partials: Vec<Partial> = beam
            .iter()
            .flat_map(|p| feature.options.iter().map(move |(v, idx)| p.extend(feature, v, *idx)))
            .collect();
        let evals = partials.len();
        cumulative += evals;
        let scored = scorer.score_all(&partials);
        let mut next: Vec<(Partial, Scored)> = partials.into_iter().zip(scored).collect();
        next.sort_by(|a, b| rank_by_gamma(&a.1, &b.1));
        next.truncate(config.zeta);
        let (kept, snapshot): (Vec<Partial>, Vec<Scored>) = next.into_iter().unzip();
        trace.iterations.push(record(it + 1, &feature.name, &snapshot, evals, cumulative));
        best = Some(snapshot[0].candidate.clone());
        beam = kept;
    }
    Ok(SearchOutcome {
        best: best.expect("at least one feature"),
        trace,
    })
}

/// Stage-wise baseline: the table of stage `k` holds every assignment of the
/// first `k` features (schema order), each extended from the stored table of
/// stage `k - 1`; the stage optimum of the mean direction-adjusted lambda is
/// recorded, and the final pick is the optimum over the full table.
pub fn dp_baseline(model: &MlpModel, dataset: &Dataset, domains: &[ValueDomain], config: &SearchConfig) -> Result<SearchOutcome, SearchError> {
    let scorer = Scorer::new(model, dataset, config)?;
    let mut features = plain_features(dataset, domains)?;
    if features.is_empty() {
        return Err(SearchError::InvalidConfig("no features to search".into()));
    }
    features.sort_by_key(|f| f.column);

    let mut trace = SearchTrace::new("dp", scorer.labels(), features.iter().map(|f| f.name.clone()).collect());
    let mut table = vec![Partial::default()];
    let mut best: Option<Scored> = None;
    let mut cumulative = 0;
    for (stage, feature) in features.iter().enumerate() {
        let size = table.len().saturating_mul(feature.options.len());
        if config.dp_capacity.is_some_and(|cap| size > cap) {
            return Err(SearchError::CapacityExceeded { stage });
        }
        let next: Vec<Partial> = table
            .iter()
            .flat_map(|p| feature.options.iter().map(move |(v, idx)| p.extend(feature, v, *idx)))
            .collect();
        let scored = scorer.score_all(&next);
        cumulative += next.len();
        let optimum = scored
            .iter()
            .min_by(|a, b| rank_by_objective(a, b))
            .expect("stage is nonempty")
            .clone();
        trace
            .iterations
            .push(record(stage + 1, &feature.name, std::slice::from_ref(&optimum), next.len(), cumulative));
        best = Some(optimum);
        table = next;
    }
    Ok(SearchOutcome {
        best: best.expect("at least one stage").candidate,
        trace,
    })
}

fn space_size(features: &[SearchFeature]) -> Option<usize> {
    features.iter().try_fold(1usize, |acc, f| acc.checked_mul(f.options.len()))
}

fn enumerate_all(scorer: &Scorer<'_>, features: &[SearchFeature]) -> Result<Vec<Scored>, SearchError> {
    match space_size(features) {
        Some(n) if n <= ORACLE_LIMIT => {}
        Some(n) => return Err(SearchError::SpaceTooLarge { size: n.to_string() }),
        None => return Err(SearchError::SpaceTooLarge { size: "overflow".into() }),
    }
    let mut partials = vec![Partial::default()];
    for f in features {
        partials = partials
            .iter()
            .flat_map(|p| f.options.iter().map(move |(v, idx)| p.extend(f, v, *idx)))
            .collect();
    }
    Ok(scorer.score_all(&partials))
}

/// Best full assignment by Gamma, found by brute force. Ties break exactly as
/// in [`ebco_search`].
pub fn exhaustive_oracle(model: &MlpModel, dataset: &Dataset, domains: &[ValueDomain], config: &SearchConfig) -> Result<Candidate, SearchError> {
    let scorer = Scorer::new(model, dataset, config)?;
    let features = plain_features(dataset, domains)?;
    let all = enumerate_all(&scorer, &features)?;
    Ok(all
        .into_iter()
        .min_by(rank_by_gamma)
        .expect("space is nonempty")
        .candidate)
}

/// Full assignment with the lowest mean direction-adjusted lambda, by brute force.
pub fn exhaustive_objective(model: &MlpModel, dataset: &Dataset, domains: &[ValueDomain], config: &SearchConfig) -> Result<Candidate, SearchError> {
    let scorer = Scorer::new(model, dataset, config)?;
    let features = plain_features(dataset, domains)?;
    let all = enumerate_all(&scorer, &features)?;
    Ok(all
        .into_iter()
        .min_by(rank_by_objective)
        .expect("space is nonempty")
        .candidate)
}

/// The kept values of pruned domains as plain domains.
pub fn kept_domains(domains: &[PrunedDomain]) -> Vec<ValueDomain> {
    domains
        .iter()
        .map(|d| ValueDomain {
            feature: d.feature.clone(),
            candidates: d.kept_values().cloned().collect(),
        })
        .collect()
}
