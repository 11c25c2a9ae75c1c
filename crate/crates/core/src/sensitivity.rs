//! Variance-based sensitivity of predictions to a fixed feature assignment.
//!
//! For label `l`, with `p` the model's predictions over the original samples
//! and `p_c` the predictions after fixing the assignment on every sample:
//!
//! ```text
//! upsilon_l = Cov(p_c, p) / Var(p)      (population normalisation)
//! lambda_l  = mean(p_c)
//! ```
//!
//! The expectations in the covariance are read as the per-sample predictions
//! themselves; the covariance runs across samples.

use ndarray::{Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use crate::assignment::Assignment;
use crate::assignment::Value;
use crate::dataset::{Dataset, DatasetError};
use crate::model::{MlpModel, ModelError};

/// Variance at or below this is treated as a constant predictor.
pub const MIN_VARIANCE: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum SensitivityError {
    #[error("predictions for label {label} have (near) zero variance")]
    DegenerateVariance { label: usize },
    #[error("sensitivity needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityScore {
    pub upsilon: Vec<f64>,
    pub lambda: Vec<f64>,
    pub assignment: Assignment,
    /// Labels whose original predictions were constant; their upsilon is 0.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degenerate: Vec<usize>,
}

/// Original predictions and their moments, computed once and reused across
/// many candidate assignments.
#[derive(Debug, Clone)]
pub struct SensitivityContext<'a> {
    model: &'a MlpModel,
    dataset: &'a Dataset,
    base: Array2<f64>,
    base_centered: Array2<f64>,
    base_var: Vec<f64>,
}

impl<'a> SensitivityContext<'a> {
    pub fn new(model: &'a MlpModel, dataset: &'a Dataset) -> Result<Self, SensitivityError> {
        let m = dataset.n_samples();
        if m < 2 {
            return Err(SensitivityError::TooFewSamples(m));
        }
        let base = model.predict(dataset.encoded())?;
        let mean = base.mean_axis(Axis(0)).expect("m >= 2");
        let base_centered = &base - &mean;
        let base_var = base_centered
            .columns()
            .into_iter()
            .map(|c| c.dot(&c) / m as f64)
            .collect();
        Ok(Self {
            model,
            dataset,
            base,
            base_centered,
            base_var,
        })
    }

    pub fn model(&self) -> &'a MlpModel {
        self.model
    }

    pub fn dataset(&self) -> &'a Dataset {
        self.dataset
    }

    /// Predictions on the unmodified dataset (`m x L`).
    pub fn base_predictions(&self) -> &Array2<f64> {
        &self.base
    }

    pub fn base_variance(&self) -> &[f64] {
        &self.base_var
    }

    /// Scores an assignment; labels with degenerate variance get upsilon 0 and
    /// are listed in `degenerate`.
    pub fn score(&self, assignment: &Assignment) -> Result<SensitivityScore, SensitivityError> {
        let bindings = self.dataset.resolve(assignment)?;
        Ok(self.score_resolved(assignment.clone(), &bindings))
    }

    /// Like [`score`](Self::score) but fails on the first degenerate label.
    pub fn score_strict(&self, assignment: &Assignment) -> Result<SensitivityScore, SensitivityError> {
        let s = self.score(assignment)?;
        match s.degenerate.first() {
            Some(&label) => Err(SensitivityError::DegenerateVariance { label }),
            None => Ok(s),
        }
    }

    pub(crate) fn score_resolved(&self, assignment: Assignment, bindings: &[(usize, Value)]) -> SensitivityScore {
        let x = self.dataset.encoded_with(bindings);
        let pc = self.model.predict_unchecked(x.view(), crate::model::OutputScale::Output);
        let m = pc.nrows() as f64;
        let mut upsilon = Vec::with_capacity(pc.ncols());
        let mut lambda = Vec::with_capacity(pc.ncols());
        let mut degenerate = Vec::new();
        for (l, col) in pc.columns().into_iter().enumerate() {
            let mean_c = col.sum() / m;
            lambda.push(mean_c);
            let var = self.base_var[l];
            if var <= MIN_VARIANCE {
                degenerate.push(l);
                upsilon.push(0.0);
                continue;
            }
            let base = self.base_centered.column(l);
            let cov = covariance_centered(col, mean_c, base, m);
            let u = cov / var;
            let var_c = col.iter().map(|v| (v - mean_c).powi(2)).sum::<f64>() / m;
            let bound = (var_c / var).sqrt();
            assert!(
                u.abs() <= bound * (1.0 + 1e-9) + 1e-12,
                "Cauchy-Schwarz violated: |{u}| > {bound}"
            );
            upsilon.push(u);
        }
        SensitivityScore {
            upsilon,
            lambda,
            assignment,
            degenerate,
        }
    }
}

fn covariance_centered(col: ArrayView1<'_, f64>, mean: f64, base_centered: ArrayView1<'_, f64>, m: f64) -> f64 {
    col.iter().zip(base_centered).map(|(c, b)| (c - mean) * b).sum::<f64>() / m
}

/// Sensitivity of `model`'s predictions on `dataset` to fixing `assignment`.
///
/// Returns `DegenerateVariance` if any label's original predictions are
/// constant; [`SensitivityContext::score`] maps those labels to 0 instead.
pub fn sensitivity_score(model: &MlpModel, dataset: &Dataset, assignment: &Assignment) -> Result<SensitivityScore, SensitivityError> {
    SensitivityContext::new(model, dataset)?.score_strict(assignment)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{FeatureDef, FeatureSchema};
    use crate::model::{train, TrainConfig};

    fn toy() -> (MlpModel, Dataset) {
        let schema = FeatureSchema::new(
            vec![
                FeatureDef::categorical("a", ["p", "q"]),
                FeatureDef::categorical("b", ["r", "s", "t"]),
                FeatureDef::numeric("c", 0.0, 1.0),
            ],
            vec!["y0".into(), "y1".into()],
        )
        .unwrap();
        let mut raw = Vec::new();
        let mut targets = Vec::new();
        for i in 0..30 {
            let a = if i % 2 == 0 { "p" } else { "q" };
            let b = ["r", "s", "t"][i % 3];
            let c = (i as f64 * 0.37).fract();
            raw.push(vec![a.into(), b.into(), Value::Number(c)]);
            targets.push(vec![u8::from(a == "p" && c > 0.3), u8::from(b == "t")]);
        }
        let ds = Dataset::from_raw(schema, raw, targets).unwrap();
        let model = train(&ds, &TrainConfig { epochs: 300, seed: 4, ..TrainConfig::default() }).unwrap();
        (model, ds)
    }

    #[test]
    fn empty_assignment_is_one() {
        let (m, ds) = toy();
        let s = sensitivity_score(&m, &ds, &Assignment::new()).unwrap();
        for u in s.upsilon {
            assert!((u - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn full_assignment_is_zero() {
        let (m, ds) = toy();
        let a = Assignment::new().with("a", "q").with("b", "s").with("c", 0.5);
        let s = sensitivity_score(&m, &ds, &a).unwrap();
        for u in s.upsilon {
            assert!(u.abs() < 1e-10);
        }
        let single = m.predict(ds.encoded_under(&a).unwrap().view()).unwrap();
        for (l, lam) in s.lambda.iter().enumerate() {
            assert!((lam - single[[0, l]]).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_predictor_is_degenerate() {
        let (m, ds) = toy();
        let flat = crate::model::MlpModel::from_parts(
            ndarray::Array2::zeros((m.input_width(), 2)),
            ndarray::Array1::zeros(2),
            ndarray::Array2::zeros((2, 2)),
            ndarray::Array1::zeros(2),
            crate::model::OutputActivation::Sigmoid,
            ds.encoding_map().clone(),
        )
        .unwrap();
        assert!(matches!(
            sensitivity_score(&flat, &ds, &Assignment::new()),
            Err(SensitivityError::DegenerateVariance { label: 0 })
        ));
        let lenient = SensitivityContext::new(&flat, &ds).unwrap().score(&Assignment::new()).unwrap();
        assert_eq!(lenient.upsilon, vec![0.0, 0.0]);
        assert_eq!(lenient.degenerate, vec![0, 1]);
        assert_eq!(lenient.lambda, vec![0.5, 0.5]);
    }

    #[test]
    fn rejects_invalid_assignment() {
        let (m, ds) = toy();
        assert!(matches!(
            sensitivity_score(&m, &ds, &Assignment::new().with("a", "zz")),
            Err(SensitivityError::Dataset(DatasetError::ValueOutOfDomain { .. }))
        ));
    }
}
