//! Threshold pruning of candidate values by attribution magnitude.
//!
//! A value's relevance for a label is the mean `|attribution|` of its feature
//! over the samples whose raw cell takes that value (numeric cells are
//! snapped to the nearest grid candidate). A value survives when its largest
//! per-label relevance exceeds `delta`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::Value;
use crate::attribution::AttributionTensor;
use crate::dataset::{Dataset, ValueDomain};

#[derive(Debug, Error)]
pub enum PruningError {
    #[error("unknown feature '{0}'")]
    UnknownFeature(String),
    #[error("value {value} is not a candidate of feature '{feature}'")]
    UnknownValue { feature: String, value: String },
    #[error("pruning threshold must be a non-negative number, got {0}")]
    InvalidThreshold(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredValue {
    pub value: Value,
    /// Position in the unpruned candidate list.
    pub index: usize,
    /// Aggregated relevance: maximum over labels.
    pub relevance: f64,
    pub per_label: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrunedDomain {
    pub feature: String,
    pub kept: Vec<ScoredValue>,
    pub dropped: Vec<ScoredValue>,
    /// Set when nothing cleared the threshold and the best value was kept anyway.
    pub guard_applied: bool,
}

impl PrunedDomain {
    /// Every candidate kept, with zero scores. Useful when no attributions exist.
    pub fn unpruned(domain: &ValueDomain, n_labels: usize) -> Self {
        Self {
            feature: domain.feature.clone(),
            kept: domain
                .candidates
                .iter()
                .enumerate()
                .map(|(index, value)| ScoredValue {
                    value: value.clone(),
                    index,
                    relevance: 0.0,
                    per_label: vec![0.0; n_labels],
                })
                .collect(),
            dropped: Vec::new(),
            guard_applied: false,
        }
    }

    pub fn kept_values(&self) -> impl Iterator<Item = &Value> {
        self.kept.iter().map(|s| &s.value)
    }
}

/// Per-candidate, per-label relevance of one feature's whole domain.
pub fn domain_relevance(tensor: &AttributionTensor, dataset: &Dataset, domain: &ValueDomain) -> Result<Vec<Vec<f64>>, PruningError> {
    let unknown = || PruningError::UnknownFeature(domain.feature.clone());
    let fi = tensor.feature_index(&domain.feature).ok_or_else(unknown)?;
    let col = dataset.schema().feature_index(&domain.feature).ok_or_else(unknown)?;
    let labels = tensor.n_labels();
    let mut sums = vec![vec![0.0; labels]; domain.len()];
    let mut counts = vec![0usize; domain.len()];
    for (s, &row) in tensor.sample_indices.iter().enumerate() {
        let cell = &dataset.raw()[row][col];
        let slot = match cell {
            Value::Number(x) => domain.nearest(*x),
            Value::Category(_) => domain.index_of(cell),
        };
        if let Some(k) = slot {
            counts[k] += 1;
            for (l, acc) in sums[k].iter_mut().enumerate() {
                *acc += tensor.values[[s, fi, l]].abs();
            }
        }
    }
    Ok(sums
        .into_iter()
        .zip(counts)
        .map(|(s, c)| if c == 0 { vec![0.0; labels] } else { s.into_iter().map(|v| v / c as f64).collect() })
        .collect())
}

/// Per-label relevance of a single candidate value.
pub fn value_relevance(tensor: &AttributionTensor, dataset: &Dataset, domain: &ValueDomain, value: &Value) -> Result<Vec<f64>, PruningError> {
    let k = domain.index_of(value).ok_or_else(|| PruningError::UnknownValue {
        feature: domain.feature.clone(),
        value: value.to_string(),
    })?;
    Ok(domain_relevance(tensor, dataset, domain)?.swap_remove(k))
}

/// Splits every domain into kept and dropped values at threshold `delta`.
///
/// A feature whose values would all be dropped keeps its most relevant value
/// (all of them on a tie), so every feature stays assignable.
pub fn prune_values(domains: &[ValueDomain], tensor: &AttributionTensor, dataset: &Dataset, delta: f64) -> Result<Vec<PrunedDomain>, PruningError> {
    if delta.is_nan() || delta < 0.0 {
        return Err(PruningError::InvalidThreshold(delta));
    }
    domains
        .iter()
        .map(|domain| {
            let scores = domain_relevance(tensor, dataset, domain)?;
            let scored: Vec<ScoredValue> = domain
                .candidates
                .iter()
                .zip(scores)
                .enumerate()
                .map(|(index, (value, per_label))| ScoredValue {
                    value: value.clone(),
                    index,
                    relevance: per_label.iter().copied().fold(0.0, f64::max),
                    per_label,
                })
                .collect();
            let (mut kept, mut dropped): (Vec<_>, Vec<_>) = scored.into_iter().partition(|s| s.relevance > delta);
            let guard_applied = kept.is_empty() && !dropped.is_empty();
            if guard_applied {
                let top = dropped.iter().map(|s| s.relevance).fold(f64::NEG_INFINITY, f64::max);
                let (best, rest): (Vec<_>, Vec<_>) = dropped.into_iter().partition(|s| s.relevance == top);
                kept = best;
                dropped = rest;
                log::warn!(
                    "every value of '{}' fell below delta = {delta}; keeping the {} most relevant",
                    domain.feature,
                    kept.len()
                );
            }
            Ok(PrunedDomain {
                feature: domain.feature.clone(),
                kept,
                dropped,
                guard_applied,
            })
        })
        .collect()
}
