//! Per-feature, per-label contribution scores.
//!
//! Three estimators share one notion of a "feature": an original schema
//! feature, which may span several encoded columns (one-hot groups). In a
//! coalition all columns of a feature move together, and column-level
//! DeepLIFT contributions are summed over the group.
//!
//! The value function of a coalition `S` for an input `x` is the mean over
//! the reference rows of the model output on the hybrid row that takes `x`'s
//! columns for features in `S` and the reference row's columns elsewhere.

use std::ops::Range;

use ndarray::{s, Array1, Array2, Array3, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::Dataset;
use crate::model::{sigmoid, MlpModel, ModelError, OutputActivation, OutputScale};
use crate::FORMAT_VERSION;

#[derive(Debug, Error)]
pub enum AttributionError {
    #[error("exact Shapley values over {n} features exceed the limit of {limit}")]
    TooManyFeatures { n: usize, limit: usize },
    #[error("row has {got} columns, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("reference set is empty")]
    EmptyReferenceSet,
    #[error("at least one permutation is required")]
    NoPermutations,
    #[error("sample row {row} is out of range for a dataset of {rows} rows")]
    RowOutOfRange { row: usize, rows: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Background rows standing in for "feature absent".
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceSet {
    rows: Array2<f64>,
    indices: Vec<usize>,
    seed: u64,
}

impl ReferenceSet {
    /// Draws `size` dataset rows without replacement. Asking for more rows
    /// than the dataset has returns every row.
    pub fn sample(dataset: &Dataset, size: usize, seed: u64) -> Result<Self, AttributionError> {
        if size == 0 {
            return Err(AttributionError::EmptyReferenceSet);
        }
        let m = dataset.n_samples();
        let indices = if size >= m {
            (0..m).collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rand::seq::index::sample(&mut rng, m, size).into_vec()
        };
        Ok(Self {
            rows: dataset.encoded().select(Axis(0), &indices),
            indices,
            seed,
        })
    }

    pub fn from_rows(rows: Array2<f64>) -> Result<Self, AttributionError> {
        if rows.nrows() == 0 {
            return Err(AttributionError::EmptyReferenceSet);
        }
        Ok(Self {
            indices: (0..rows.nrows()).collect(),
            rows,
            seed: 0,
        })
    }

    pub fn rows(&self) -> ArrayView2<'_, f64> {
        self.rows.view()
    }

    /// Dataset row indices the references were taken from.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.rows.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.nrows() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AttributionMethod {
    Exact,
    #[serde(rename = "montecarlo")]
    MonteCarlo,
    #[default]
    #[serde(rename = "deepshap")]
    DeepShap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttributionOptions {
    /// Attribute the activated output (default) or the output logit.
    pub scale: OutputScale,
    pub exact_limit: usize,
    /// Below this input delta the rescale rule falls back to the gradient.
    pub epsilon: f64,
    pub permutations: usize,
    pub seed: u64,
}

impl Default for AttributionOptions {
    fn default() -> Self {
        Self {
            scale: OutputScale::Output,
            exact_limit: 12,
            epsilon: 1e-7,
            permutations: 1000,
            seed: 0,
        }
    }
}

fn check_row(model: &MlpModel, width: usize) -> Result<(), AttributionError> {
    if width != model.input_width() {
        return Err(AttributionError::DimensionMismatch {
            expected: model.input_width(),
            got: width,
        });
    }
    Ok(())
}

fn check_refs(model: &MlpModel, refs: &ReferenceSet) -> Result<(), AttributionError> {
    if refs.is_empty() {
        return Err(AttributionError::EmptyReferenceSet);
    }
    check_row(model, refs.rows.ncols())
}

/// Mean model output over a batch, per label.
fn batch_mean(model: &MlpModel, rows: ArrayView2<'_, f64>, scale: OutputScale) -> Array1<f64> {
    model
        .predict_unchecked(rows, scale)
        .mean_axis(Axis(0))
        .expect("batch is nonempty")
}

fn overwrite_group(hybrid: &mut Array2<f64>, x: ArrayView1<'_, f64>, cols: &Range<usize>) {
    let src = x.slice(s![cols.clone()]);
    for mut row in hybrid.rows_mut() {
        row.slice_mut(s![cols.clone()]).assign(&src);
    }
}

/// Exact Shapley values by enumerating every coalition. Returns `n x L`.
///
/// Coalition `S` of size `s` gets weight `s! (n - s - 1)! / n!`.
pub fn shapley_exact(
    model: &MlpModel,
    x: ArrayView1<'_, f64>,
    refs: &ReferenceSet,
    opts: &AttributionOptions,
) -> Result<Array2<f64>, AttributionError> {
    check_row(model, x.len())?;
    check_refs(model, refs)?;
    let groups = model.encoding_map().groups();
    let n = groups.len();
    if n > opts.exact_limit {
        return Err(AttributionError::TooManyFeatures {
            n,
            limit: opts.exact_limit,
        });
    }
    let labels = model.n_labels();

    let values: Vec<Array1<f64>> = (0..1usize << n)
        .map(|mask| {
            let mut hybrid = refs.rows.clone();
            for (i, cols) in groups.iter().enumerate() {
                if mask & (1 << i) != 0 {
                    overwrite_group(&mut hybrid, x, cols);
                }
            }
            batch_mean(model, hybrid.view(), opts.scale)
        })
        .collect();

    let weights = coalition_weights(n);
    let mut phi = Array2::zeros((n, labels));
    for i in 0..n {
        let bit = 1 << i;
        for mask in (0..1usize << n).filter(|m| m & bit == 0) {
            let w = weights[mask.count_ones() as usize];
            let delta = &values[mask | bit] - &values[mask];
            phi.row_mut(i).scaled_add(w, &delta);
        }
    }
    Ok(phi)
}

/// `s! (n - s - 1)! / n!` for `s = 0..n`.
fn coalition_weights(n: usize) -> Vec<f64> {
    let fact = |k: usize| (1..=k).map(|v| v as f64).product::<f64>();
    (0..n).map(|s| fact(s) * fact(n - s - 1) / fact(n)).collect()
}

/// Permutation-sampling estimate of [`shapley_exact`].
///
/// Each sampled feature order walks from the reference rows to `x`, adding
/// one feature at a time; the change in the reference-averaged output is
/// credited to the feature just added.
pub fn shapley_montecarlo(
    model: &MlpModel,
    x: ArrayView1<'_, f64>,
    refs: &ReferenceSet,
    permutations: usize,
    seed: u64,
    opts: &AttributionOptions,
) -> Result<Array2<f64>, AttributionError> {
    check_row(model, x.len())?;
    check_refs(model, refs)?;
    if permutations == 0 {
        return Err(AttributionError::NoPermutations);
    }
    let groups = model.encoding_map().groups();
    let n = groups.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut phi = Array2::zeros((n, model.n_labels()));
    let start = batch_mean(model, refs.rows(), opts.scale);
    for _ in 0..permutations {
        order.shuffle(&mut rng);
        let mut hybrid = refs.rows.clone();
        let mut prev = start.clone();
        for &i in &order {
            overwrite_group(&mut hybrid, x, &groups[i]);
            let next = batch_mean(model, hybrid.view(), opts.scale);
            let delta = &next - &prev;
            phi.row_mut(i).scaled_add(1.0, &delta);
            prev = next;
        }
    }
    Ok(phi / permutations as f64)
}

/// Forward quantities of one row needed by the rescale rule.
struct Trace {
    z1: Array1<f64>,
    h: Array1<f64>,
    z2: Array1<f64>,
}

fn trace(model: &MlpModel, x: ArrayView1<'_, f64>) -> Trace {
    let z1 = x.dot(&model.w1()) + model.b1();
    let h = z1.mapv(|z| z.max(0.0));
    let z2 = h.dot(&model.w2()) + model.b2();
    Trace { z1, h, z2 }
}

/// Rescale-rule multiplier for a nonlinearity: secant slope, or the
/// derivative at `z` when the delta is below `eps`.
fn rescale(y: f64, y_ref: f64, z: f64, z_ref: f64, eps: f64, derivative: impl Fn(f64) -> f64) -> f64 {
    let dz = z - z_ref;
    if dz.abs() > eps {
        (y - y_ref) / dz
    } else {
        derivative(z)
    }
}

/// Column-level DeepLIFT contributions `m_c * (x_c - ref_c)`, shape `p x L`.
fn deeplift_columns(model: &MlpModel, x: ArrayView1<'_, f64>, xt: &Trace, rt: &Trace, r: ArrayView1<'_, f64>, opts: &AttributionOptions) -> Array2<f64> {
    let eps = opts.epsilon;
    let hidden_mult: Array1<f64> = (0..model.hidden())
        .map(|j| {
            rescale(xt.h[j], rt.h[j], xt.z1[j], rt.z1[j], eps, |z| if z > 0.0 { 1.0 } else { 0.0 })
        })
        .collect();
    let out_mult: Array1<f64> = (0..model.n_labels())
        .map(|l| match (model.output_activation(), opts.scale) {
            (OutputActivation::Sigmoid, OutputScale::Output) => rescale(
                sigmoid(xt.z2[l]),
                sigmoid(rt.z2[l]),
                xt.z2[l],
                rt.z2[l],
                eps,
                |z| {
                    let s = sigmoid(z);
                    s * (1.0 - s)
                },
            ),
            _ => 1.0,
        })
        .collect();
    // hidden -> output multipliers, then input -> output through W1
    let w2_scaled = &model.w2() * &hidden_mult.view().insert_axis(Axis(1)) * out_mult.view().insert_axis(Axis(0));
    let mult = model.w1().dot(&w2_scaled);
    let delta = &x - &r;
    mult * delta.view().insert_axis(Axis(1))
}

fn group_sum(cols: &Array2<f64>, groups: &[Range<usize>]) -> Array2<f64> {
    let mut out = Array2::zeros((groups.len(), cols.ncols()));
    for (i, g) in groups.iter().enumerate() {
        out.row_mut(i).assign(&cols.slice(s![g.clone(), ..]).sum_axis(Axis(0)));
    }
    out
}

/// DeepLIFT contributions of each feature to each label for one input and
/// one reference, using the rescale rule. Returns `n x L`.
///
/// Contributions sum (over features) to the output difference between `x`
/// and `reference`.
pub fn deeplift_multipliers(
    model: &MlpModel,
    x: ArrayView1<'_, f64>,
    reference: ArrayView1<'_, f64>,
    opts: &AttributionOptions,
) -> Result<Array2<f64>, AttributionError> {
    check_row(model, x.len())?;
    check_row(model, reference.len())?;
    let cols = deeplift_columns(model, x, &trace(model, x), &trace(model, reference), reference, opts);
    Ok(group_sum(&cols, &model.encoding_map().groups()))
}

/// DeepLIFT averaged over a reference set, for one input row.
fn deepshap_row(model: &MlpModel, x: ArrayView1<'_, f64>, refs: &ReferenceSet, ref_traces: &[Trace], groups: &[Range<usize>], opts: &AttributionOptions) -> Array2<f64> {
    let xt = trace(model, x);
    let mut acc = Array2::zeros((model.input_width(), model.n_labels()));
    for (r, rt) in refs.rows.rows().into_iter().zip(ref_traces) {
        acc += &deeplift_columns(model, x, &xt, rt, r, opts);
    }
    group_sum(&(acc / refs.len() as f64), groups)
}

/// Attribution scores for a batch of samples.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributionTensor {
    /// `samples x features x labels`.
    pub values: Array3<f64>,
    pub method: AttributionMethod,
    /// Per-label mean model output over the reference rows.
    pub baseline: Vec<f64>,
    /// Dataset row of each sample (or its position in the input batch).
    pub sample_indices: Vec<usize>,
    pub features: Vec<String>,
    pub labels: Vec<String>,
}

impl AttributionTensor {
    pub fn n_samples(&self) -> usize {
        self.values.dim().0
    }

    pub fn n_features(&self) -> usize {
        self.values.dim().1
    }

    pub fn n_labels(&self) -> usize {
        self.values.dim().2
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f == name)
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Self {
        assert_eq!(labels.len(), self.n_labels());
        self.labels = labels;
        self
    }

    /// Mean `|attribution|` of each feature over samples and labels.
    pub fn mean_abs_per_feature(&self) -> Vec<f64> {
        (0..self.n_features())
            .map(|i| self.values.slice(s![.., i, ..]).mapv(f64::abs).mean().unwrap_or(0.0))
            .collect()
    }

    pub fn to_csv_string(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["sample", "feature", "label", "value"]).expect("in-memory write");
        for ((s, i, l), v) in self.values.indexed_iter() {
            w.write_record([
                self.sample_indices[s].to_string(),
                self.features[i].clone(),
                self.labels[l].clone(),
                v.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
    }

    pub fn to_json(&self) -> serde_json::Value {
        let values: Vec<Vec<Vec<f64>>> = self
            .values
            .outer_iter()
            .map(|s| s.outer_iter().map(|f| f.to_vec()).collect())
            .collect();
        serde_json::json!({
            "spec_version": FORMAT_VERSION,
            "method": self.method,
            "features": self.features,
            "labels": self.labels,
            "baseline": self.baseline,
            "sample_indices": self.sample_indices,
            "values": values,
        })
    }
}

/// DeepSHAP: DeepLIFT contributions averaged over every reference row,
/// for each row of `rows`. Samples are evaluated in parallel; the output
/// keeps input order.
pub fn deepshap_attribute(
    model: &MlpModel,
    rows: ArrayView2<'_, f64>,
    refs: &ReferenceSet,
    opts: &AttributionOptions,
) -> Result<AttributionTensor, AttributionError> {
    check_row(model, rows.ncols())?;
    check_refs(model, refs)?;
    let groups = model.encoding_map().groups();
    let ref_traces: Vec<Trace> = refs.rows.rows().into_iter().map(|r| trace(model, r)).collect();
    let per_sample: Vec<Array2<f64>> = (0..rows.nrows())
        .into_par_iter()
        .map(|i| deepshap_row(model, rows.row(i), refs, &ref_traces, &groups, opts))
        .collect();
    Ok(assemble(model, per_sample, AttributionMethod::DeepShap, refs, opts, (0..rows.nrows()).collect()))
}

fn assemble(
    model: &MlpModel,
    per_sample: Vec<Array2<f64>>,
    method: AttributionMethod,
    refs: &ReferenceSet,
    opts: &AttributionOptions,
    sample_indices: Vec<usize>,
) -> AttributionTensor {
    let n = model.encoding_map().n_features();
    let labels = model.n_labels();
    let mut values = Array3::zeros((per_sample.len(), n, labels));
    for (s, phi) in per_sample.iter().enumerate() {
        values.slice_mut(s![s, .., ..]).assign(phi);
    }
    AttributionTensor {
        values,
        method,
        baseline: batch_mean(model, refs.rows(), opts.scale).to_vec(),
        sample_indices,
        features: model.encoding_map().feature_names(),
        labels: (0..labels).map(|l| format!("label{l}")).collect(),
    }
}

/// Attributes the given dataset rows with the chosen method. Per-sample work
/// runs in parallel; Monte Carlo seeds are derived from `opts.seed` and the
/// sample's position so results do not depend on scheduling.
pub fn attribute_rows(
    model: &MlpModel,
    dataset: &Dataset,
    sample_rows: &[usize],
    refs: &ReferenceSet,
    method: AttributionMethod,
    opts: &AttributionOptions,
) -> Result<AttributionTensor, AttributionError> {
    if let Some(&row) = sample_rows.iter().find(|&&r| r >= dataset.n_samples()) {
        return Err(AttributionError::RowOutOfRange {
            row,
            rows: dataset.n_samples(),
        });
    }
    let rows = dataset.encoded().select(Axis(0), sample_rows);
    let tensor = match method {
        AttributionMethod::DeepShap => {
            let mut t = deepshap_attribute(model, rows.view(), refs, opts)?;
            t.sample_indices = sample_rows.to_vec();
            t
        }
        AttributionMethod::Exact | AttributionMethod::MonteCarlo => {
            let per_sample = (0..rows.nrows())
                .into_par_iter()
                .map(|i| match method {
                    AttributionMethod::Exact => shapley_exact(model, rows.row(i), refs, opts),
                    _ => shapley_montecarlo(model, rows.row(i), refs, opts.permutations, opts.seed.wrapping_add(i as u64), opts),
                })
                .collect::<Result<Vec<_>, _>>()?;
            assemble(model, per_sample, method, refs, opts, sample_rows.to_vec())
        }
    };
    Ok(tensor.with_labels(dataset.schema().labels.clone()))
}
