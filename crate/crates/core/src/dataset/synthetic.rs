//! Synthetic multi-label data with a planted low-risk assignment.
//!
//! Samples that match the planted assignment on every planted feature draw
//! their labels with a low positive rate; every other sample draws with a
//! high rate. Per-label rates are jittered by `label_noise`.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetError, FeatureDef, FeatureSchema};
use crate::assignment::{Assignment, Value};

pub const MAX_LOW_PROB: f64 = 0.1;
pub const MIN_HIGH_PROB: f64 = 0.7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    /// Categorical features `f0..`, each with `values_per_feature` categories `v0..`.
    pub n_features: usize,
    pub values_per_feature: usize,
    /// Extra numeric features `x0..` on [0, 1] that never influence labels.
    pub n_numeric: usize,
    pub n_labels: usize,
    pub n_samples: usize,
    /// Number of planted categorical features `k`.
    pub n_planted: usize,
    pub low_prob: f64,
    pub high_prob: f64,
    pub label_noise: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_features: 5,
            values_per_feature: 3,
            n_numeric: 0,
            n_labels: 3,
            n_samples: 500,
            n_planted: 2,
            low_prob: 0.05,
            high_prob: 0.8,
            label_noise: 0.03,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), DatasetError> {
        let bad = |m: String| Err(DatasetError::InvalidSpec(m));
        if self.n_planted > self.n_features {
            return bad(format!(
                "{} planted features but only {} categorical features",
                self.n_planted, self.n_features
            ));
        }
        if self.n_samples < 10 {
            return bad(format!("need at least 10 samples, got {}", self.n_samples));
        }
        if self.n_features + self.n_numeric == 0 {
            return bad("no features".into());
        }
        if self.n_labels == 0 {
            return bad("no labels".into());
        }
        if self.values_per_feature < 2 {
            return bad("values_per_feature must be at least 2".into());
        }
        if !(0.0..=MAX_LOW_PROB).contains(&self.low_prob) {
            return bad(format!("low_prob must lie in [0, {MAX_LOW_PROB}]"));
        }
        if !(MIN_HIGH_PROB..=1.0).contains(&self.high_prob) {
            return bad(format!("high_prob must lie in [{MIN_HIGH_PROB}, 1]"));
        }
        if !(self.label_noise >= 0.0 && self.label_noise.is_finite()) {
            return bad("label_noise must be finite and non-negative".into());
        }
        Ok(())
    }

    pub fn schema(&self) -> FeatureSchema {
        let mut features: Vec<FeatureDef> = (0..self.n_features)
            .map(|j| FeatureDef::categorical(format!("f{j}"), (0..self.values_per_feature).map(|v| format!("v{v}"))))
            .collect();
        features.extend((0..self.n_numeric).map(|j| FeatureDef::numeric(format!("x{j}"), 0.0, 1.0)));
        FeatureSchema {
            features,
            labels: (0..self.n_labels).map(|l| format!("y{l}")).collect(),
        }
    }
}

/// The planted assignment and the per-label positive rates actually used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedTruth {
    pub assignment: Assignment,
    pub low_prob: Vec<f64>,
    pub high_prob: Vec<f64>,
    pub n_matching: usize,
}

/// Draws a dataset from `spec`. Identical `(spec, seed)` gives identical output.
pub fn generate_synthetic(spec: &SyntheticSpec, seed: u64) -> Result<(Dataset, PlantedTruth), DatasetError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schema = spec.schema();

    let mut order: Vec<usize> = (0..spec.n_features).collect();
    order.shuffle(&mut rng);
    let mut planted: Vec<(usize, usize)> = order[..spec.n_planted]
        .iter()
        .map(|&j| (j, rng.gen_range(0..spec.values_per_feature)))
        .collect();
    planted.sort_unstable();

    let jitter = |rng: &mut ChaCha8Rng| {
        if spec.label_noise > 0.0 {
            rng.gen_range(-spec.label_noise..=spec.label_noise)
        } else {
            0.0
        }
    };
    let low: Vec<f64> = (0..spec.n_labels)
        .map(|_| (spec.low_prob + jitter(&mut rng)).clamp(0.0, MAX_LOW_PROB))
        .collect();
    let high: Vec<f64> = (0..spec.n_labels)
        .map(|_| (spec.high_prob + jitter(&mut rng)).clamp(MIN_HIGH_PROB, 1.0))
        .collect();

    let mut raw = Vec::with_capacity(spec.n_samples);
    let mut targets = Vec::with_capacity(spec.n_samples);
    let mut n_matching = 0;
    for _ in 0..spec.n_samples {
        let cats: Vec<usize> = (0..spec.n_features)
            .map(|_| rng.gen_range(0..spec.values_per_feature))
            .collect();
        let nums: Vec<f64> = (0..spec.n_numeric).map(|_| rng.gen::<f64>()).collect();
        let matches = planted.iter().all(|&(j, v)| cats[j] == v);
        n_matching += usize::from(matches);
        let probs = if matches { &low } else { &high };
        targets.push(probs.iter().map(|&p| u8::from(rng.gen::<f64>() < p)).collect());
        raw.push(
            cats.iter()
                .map(|v| Value::Category(format!("v{v}")))
                .chain(nums.into_iter().map(Value::Number))
                .collect(),
        );
    }

    let assignment = planted
        .iter()
        .map(|&(j, v)| (format!("f{j}"), Value::Category(format!("v{v}"))))
        .collect();
    let dataset = Dataset::from_raw(schema, raw, targets)?;
    Ok((
        dataset,
        PlantedTruth {
            assignment,
            low_prob: low,
            high_prob: high,
            n_matching,
        },
    ))
}
