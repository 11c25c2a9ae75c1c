//! Single-hidden-layer multi-label network: `sigmoid(relu(x W1 + b1) W2 + b2)`.
//!
//! Training is full-batch gradient descent on the mean per-label binary
//! cross-entropy, initialised from a seeded PRNG so that a fixed seed gives
//! bit-identical weights.

use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::Assignment;
use crate::dataset::{Dataset, DatasetError, EncodingMap};
use crate::FORMAT_VERSION;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("input has {got} columns, model expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("training loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("invalid training config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("cannot access '{path}': {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed model document: {0}")]
    Format(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    #[default]
    Sigmoid,
    /// Linear output; used for hand-built models in tests.
    Identity,
}

/// Which quantity attribution and scoring read off the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OutputScale {
    /// The activated output (probabilities for a sigmoid head).
    #[default]
    Output,
    /// The pre-activation output logit.
    Logit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Fraction of rows held out for reporting only; 0 trains on everything.
    pub holdout_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: 30,
            epochs: 2000,
            learning_rate: 0.1,
            seed: 0,
            holdout_fraction: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HoldoutMetrics {
    pub rows: usize,
    pub loss: f64,
    /// Per-label accuracy at threshold 0.5.
    pub accuracy: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub seed: u64,
    pub epochs: usize,
    pub learning_rate: f64,
    pub hidden: usize,
    pub initial_loss: f64,
    pub final_loss: f64,
    pub training_rows: usize,
    pub holdout: Option<HoldoutMetrics>,
}

/// Parameter gradients (or any parameter-shaped tensors).
#[derive(Debug, Clone)]
pub struct Gradients {
    pub w1: Array2<f64>,
    pub b1: Array1<f64>,
    pub w2: Array2<f64>,
    pub b2: Array1<f64>,
}

/// Intermediate activations of one forward pass.
pub(crate) struct Forward {
    pub z1: Array2<f64>,
    pub h: Array2<f64>,
    pub z2: Array2<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    w1: Array2<f64>,
    b1: Array1<f64>,
    w2: Array2<f64>,
    b2: Array1<f64>,
    output: OutputActivation,
    encoding: EncodingMap,
    train_meta: Option<TrainMeta>,
}

impl MlpModel {
    /// Assembles a model from explicit parameters. `w1` is `p x h`, `w2` is `h x L`.
    pub fn from_parts(
        w1: Array2<f64>,
        b1: Array1<f64>,
        w2: Array2<f64>,
        b2: Array1<f64>,
        output: OutputActivation,
        encoding: EncodingMap,
    ) -> Result<Self, ModelError> {
        let model = Self {
            w1,
            b1,
            w2,
            b2,
            output,
            encoding,
            train_meta: None,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<(), ModelError> {
        let (p, h) = self.w1.dim();
        let (h2, l) = self.w2.dim();
        if h == 0 || l == 0 || p == 0 {
            return Err(ModelError::Invalid("empty layer".into()));
        }
        if self.b1.len() != h || h2 != h || self.b2.len() != l {
            return Err(ModelError::Invalid(format!(
                "inconsistent shapes w1 {p}x{h}, b1 {}, w2 {h2}x{l}, b2 {}",
                self.b1.len(),
                self.b2.len()
            )));
        }
        if self.encoding.width != p {
            return Err(ModelError::Invalid(format!(
                "encoding width {} does not match input width {p}",
                self.encoding.width
            )));
        }
        let finite = self.w1.iter().chain(&self.b1).chain(&self.w2).chain(&self.b2).all(|x| x.is_finite());
        if !finite {
            return Err(ModelError::Invalid("non-finite parameter".into()));
        }
        Ok(())
    }

    pub fn input_width(&self) -> usize {
        self.w1.nrows()
    }

    pub fn hidden(&self) -> usize {
        self.w1.ncols()
    }

    pub fn n_labels(&self) -> usize {
        self.w2.ncols()
    }

    pub fn w1(&self) -> ArrayView2<'_, f64> {
        self.w1.view()
    }

    pub fn b1(&self) -> ArrayView1<'_, f64> {
        self.b1.view()
    }

    pub fn w2(&self) -> ArrayView2<'_, f64> {
        self.w2.view()
    }

    pub fn b2(&self) -> ArrayView1<'_, f64> {
        self.b2.view()
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output
    }

    pub fn encoding_map(&self) -> &EncodingMap {
        &self.encoding
    }

    pub fn train_meta(&self) -> Option<&TrainMeta> {
        self.train_meta.as_ref()
    }

    /// Copy with the output bias replaced.
    pub fn with_output_bias(&self, b2: Array1<f64>) -> Result<Self, ModelError> {
        let mut m = self.clone();
        m.b2 = b2;
        m.validate()?;
        Ok(m)
    }

    fn check_width(&self, got: usize) -> Result<(), ModelError> {
        if got != self.input_width() {
            return Err(ModelError::DimensionMismatch {
                expected: self.input_width(),
                got,
            });
        }
        Ok(())
    }

    pub(crate) fn forward(&self, x: ArrayView2<'_, f64>) -> Forward {
        let z1 = x.dot(&self.w1) + &self.b1;
        let h = z1.mapv(relu);
        let z2 = h.dot(&self.w2) + &self.b2;
        Forward { z1, h, z2 }
    }

    fn activate(&self, z: f64) -> f64 {
        match self.output {
            OutputActivation::Sigmoid => sigmoid(z),
            OutputActivation::Identity => z,
        }
    }

    /// Per-row, per-label scores. With a sigmoid head every entry is in [0, 1].
    pub fn predict(&self, rows: ArrayView2<'_, f64>) -> Result<Array2<f64>, ModelError> {
        self.predict_scaled(rows, OutputScale::Output)
    }

    /// Like [`predict`](Self::predict) but optionally returning output logits.
    pub fn predict_scaled(&self, rows: ArrayView2<'_, f64>, scale: OutputScale) -> Result<Array2<f64>, ModelError> {
        self.check_width(rows.ncols())?;
        Ok(self.predict_unchecked(rows, scale))
    }

    pub(crate) fn predict_unchecked(&self, rows: ArrayView2<'_, f64>, scale: OutputScale) -> Array2<f64> {
        let z2 = self.forward(rows).z2;
        match scale {
            OutputScale::Logit => z2,
            OutputScale::Output => z2.mapv(|z| self.activate(z)),
        }
    }

    pub fn predict_row(&self, row: ArrayView1<'_, f64>) -> Result<Vec<f64>, ModelError> {
        let rows = row.insert_axis(Axis(0));
        Ok(self.predict(rows)?.row(0).to_vec())
    }

    /// Training loss and its gradient with respect to every parameter.
    ///
    /// Sigmoid heads use mean binary cross-entropy over samples and labels;
    /// identity heads use half the mean squared error.
    pub fn loss_and_gradients(&self, x: ArrayView2<'_, f64>, targets: ArrayView2<'_, f64>) -> Result<(f64, Gradients), ModelError> {
        self.check_width(x.ncols())?;
        if targets.dim() != (x.nrows(), self.n_labels()) {
            return Err(ModelError::DimensionMismatch {
                expected: self.n_labels(),
                got: targets.ncols(),
            });
        }
        let fwd = self.forward(x);
        let count = (x.nrows() * self.n_labels()) as f64;
        let (loss, dz2) = match self.output {
            OutputActivation::Sigmoid => {
                let loss = ndarray::Zip::from(&fwd.z2).and(&targets).fold(0.0, |acc, &z, &t| acc + bce_with_logit(z, t));
                let mut dz2 = fwd.z2.mapv(sigmoid);
                dz2 -= &targets;
                (loss / count, dz2 / count)
            }
            OutputActivation::Identity => {
                let diff = &fwd.z2 - &targets;
                let loss = 0.5 * diff.iter().map(|d| d * d).sum::<f64>();
                (loss / count, diff / count)
            }
        };
        let gw2 = fwd.h.t().dot(&dz2);
        let gb2 = dz2.sum_axis(Axis(0));
        let mut dz1 = dz2.dot(&self.w2.t());
        dz1.zip_mut_with(&fwd.z1, |d, &z| {
            if z <= 0.0 {
                *d = 0.0;
            }
        });
        let gw1 = x.t().dot(&dz1);
        let gb1 = dz1.sum_axis(Axis(0));
        Ok((
            loss,
            Gradients {
                w1: gw1,
                b1: gb1,
                w2: gw2,
                b2: gb2,
            },
        ))
    }

    /// Loss only.
    pub fn loss(&self, x: ArrayView2<'_, f64>, targets: ArrayView2<'_, f64>) -> Result<f64, ModelError> {
        Ok(self.loss_and_gradients(x, targets)?.0)
    }

    /// Mutable access to the parameter tensors in `(w1, b1, w2, b2)` order.
    /// Intended for finite-difference checks.
    pub fn params_mut(&mut self) -> [&mut [f64]; 4] {
        [
            self.w1.as_slice_mut().expect("standard layout"),
            self.b1.as_slice_mut().expect("standard layout"),
            self.w2.as_slice_mut().expect("standard layout"),
            self.b2.as_slice_mut().expect("standard layout"),
        ]
    }

    /// The versioned JSON document `save_json` writes.
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&ModelDocument::from(self)).expect("model document serializes") + "\n"
    }

    pub fn save_json(&self, path: &Path) -> Result<(), ModelError> {
        std::fs::write(path, self.to_json_string()).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn load_json(path: &Path) -> Result<Self, ModelError> {
        let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let doc: ModelDocument = serde_json::from_str(&text)?;
        doc.try_into()
    }
}

fn relu(z: f64) -> f64 {
    z.max(0.0)
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Numerically stable `-(t ln s(z) + (1 - t) ln(1 - s(z)))`.
fn bce_with_logit(z: f64, t: f64) -> f64 {
    z.max(0.0) - z * t + (-z.abs()).exp().ln_1p()
}

/// Fits a model to `dataset` by full-batch gradient descent.
pub fn train(dataset: &Dataset, config: &TrainConfig) -> Result<MlpModel, ModelError> {
    if config.hidden == 0 || config.epochs == 0 {
        return Err(ModelError::InvalidConfig("hidden and epochs must be positive".into()));
    }
    if !(config.learning_rate > 0.0 && config.learning_rate.is_finite()) {
        return Err(ModelError::InvalidConfig("learning rate must be positive".into()));
    }
    if !(0.0..1.0).contains(&config.holdout_fraction) {
        return Err(ModelError::InvalidConfig("holdout_fraction must lie in [0, 1)".into()));
    }
    let m = dataset.n_samples();
    let (train_rows, holdout_rows) = split_rows(m, config);
    let x = dataset.encoded().select(Axis(0), &train_rows);
    let t = dataset.targets().select(Axis(0), &train_rows);

    let p = dataset.width();
    let l = dataset.n_labels();
    let h = config.hidden;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let r1 = (6.0 / (p + h) as f64).sqrt();
    let r2 = (6.0 / (h + l) as f64).sqrt();
    let w1 = Array2::from_shape_simple_fn((p, h), || rng.gen_range(-r1..r1));
    let w2 = Array2::from_shape_simple_fn((h, l), || rng.gen_range(-r2..r2));
    let mut model = MlpModel::from_parts(
        w1,
        Array1::zeros(h),
        w2,
        Array1::zeros(l),
        OutputActivation::Sigmoid,
        dataset.encoding_map().clone(),
    )?;

    let lr = config.learning_rate;
    let mut initial_loss = f64::NAN;
    for epoch in 0..config.epochs {
        let (loss, g) = model.loss_and_gradients(x.view(), t.view())?;
        if !loss.is_finite() {
            return Err(ModelError::NonFiniteLoss { epoch });
        }
        if epoch == 0 {
            initial_loss = loss;
        }
        model.w1.scaled_add(-lr, &g.w1);
        model.b1.scaled_add(-lr, &g.b1);
        model.w2.scaled_add(-lr, &g.w2);
        model.b2.scaled_add(-lr, &g.b2);
    }
    let final_loss = model.loss(x.view(), t.view())?;
    if !final_loss.is_finite() {
        return Err(ModelError::NonFiniteLoss { epoch: config.epochs });
    }
    model.validate()?;

    let holdout = if holdout_rows.is_empty() {
        None
    } else {
        let hx = dataset.encoded().select(Axis(0), &holdout_rows);
        let ht = dataset.targets().select(Axis(0), &holdout_rows);
        let loss = model.loss(hx.view(), ht.view())?;
        let pred = model.predict(hx.view())?;
        let accuracy = (0..l)
            .map(|j| {
                let hits = pred
                    .column(j)
                    .iter()
                    .zip(ht.column(j))
                    .filter(|(&s, &y)| (s >= 0.5) == (y >= 0.5))
                    .count();
                hits as f64 / holdout_rows.len() as f64
            })
            .collect();
        Some(HoldoutMetrics {
            rows: holdout_rows.len(),
            loss,
            accuracy,
        })
    };

    model.train_meta = Some(TrainMeta {
        seed: config.seed,
        epochs: config.epochs,
        learning_rate: lr,
        hidden: h,
        initial_loss,
        final_loss,
        training_rows: train_rows.len(),
        holdout,
    });
    Ok(model)
}

fn split_rows(m: usize, config: &TrainConfig) -> (Vec<usize>, Vec<usize>) {
    let mut rows: Vec<usize> = (0..m).collect();
    if config.holdout_fraction <= 0.0 || m < 2 {
        return (rows, Vec::new());
    }
    // separate stream so enabling holdout does not perturb weight init
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x5eed_401d);
    rows.shuffle(&mut rng);
    let n_hold = ((m as f64 * config.holdout_fraction).ceil() as usize).clamp(1, m - 1);
    let holdout = rows.split_off(m - n_hold);
    rows.sort_unstable();
    (rows, holdout)
}

/// Per-label mean prediction over `dataset` with `assignment` fixed on every row.
pub fn mean_prediction(model: &MlpModel, dataset: &Dataset, assignment: &Assignment) -> Result<Vec<f64>, ModelError> {
    let x = dataset.encoded_under(assignment)?;
    let pred = model.predict(x.view())?;
    Ok(pred.mean_axis(Axis(0)).expect("dataset is nonempty").to_vec())
}

/// On-disk JSON form of a model; weight matrices are row-major.
#[derive(Debug, Serialize, Deserialize)]
struct ModelDocument {
    spec_version: String,
    input_width: usize,
    hidden: usize,
    labels: usize,
    hidden_activation: String,
    output_activation: OutputActivation,
    w1: Vec<f64>,
    b1: Vec<f64>,
    w2: Vec<f64>,
    b2: Vec<f64>,
    encoding_map: EncodingMap,
    train_meta: Option<TrainMeta>,
}

impl From<&MlpModel> for ModelDocument {
    fn from(m: &MlpModel) -> Self {
        Self {
            spec_version: FORMAT_VERSION.to_string(),
            input_width: m.input_width(),
            hidden: m.hidden(),
            labels: m.n_labels(),
            hidden_activation: "relu".into(),
            output_activation: m.output,
            w1: m.w1.iter().copied().collect(),
            b1: m.b1.to_vec(),
            w2: m.w2.iter().copied().collect(),
            b2: m.b2.to_vec(),
            encoding_map: m.encoding.clone(),
            train_meta: m.train_meta.clone(),
        }
    }
}

impl TryFrom<ModelDocument> for MlpModel {
    type Error = ModelError;

    fn try_from(doc: ModelDocument) -> Result<Self, ModelError> {
        if doc.hidden_activation != "relu" {
            return Err(ModelError::Invalid(format!("unsupported hidden activation '{}'", doc.hidden_activation)));
        }
        let shape_err = |e: ndarray::ShapeError| ModelError::Invalid(e.to_string());
        let w1 = Array2::from_shape_vec((doc.input_width, doc.hidden), doc.w1).map_err(shape_err)?;
        let w2 = Array2::from_shape_vec((doc.hidden, doc.labels), doc.w2).map_err(shape_err)?;
        let mut model = MlpModel::from_parts(
            w1,
            Array1::from(doc.b1),
            w2,
            Array1::from(doc.b2),
            doc.output_activation,
            doc.encoding_map,
        )?;
        model.train_meta = doc.train_meta;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{FeatureDef, FeatureSchema};
    use crate::Value;
    use ndarray::array;

    fn tiny(w1: Array2<f64>, b1: Array1<f64>, w2: Array2<f64>, b2: Array1<f64>) -> MlpModel {
        let p = w1.nrows();
        MlpModel::from_parts(w1, b1, w2, b2, OutputActivation::Sigmoid, EncodingMap::identity(p)).unwrap()
    }

    #[test]
    fn zero_network_predicts_one_half() {
        let m = tiny(Array2::zeros((3, 4)), Array1::zeros(4), Array2::zeros((4, 2)), Array1::zeros(2));
        let x = array![[1.0, -2.0, 3.0], [0.5, 0.5, 0.5]];
        assert!(m.predict(x.view()).unwrap().iter().all(|&s| s == 0.5));
    }

    #[test]
    fn unit_chain_is_sigmoid_of_input() {
        let m = tiny(array![[1.0]], array![0.0], array![[1.0]], array![0.0]);
        let s = m.predict(array![[2.0]].view()).unwrap()[[0, 0]];
        assert!((s - 0.880_797_077_977_882_3).abs() < 1e-12);
    }

    #[test]
    fn rejects_wrong_width() {
        let m = tiny(array![[1.0]], array![0.0], array![[1.0]], array![0.0]);
        assert!(matches!(
            m.predict(array![[1.0, 2.0]].view()),
            Err(ModelError::DimensionMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn rejects_inconsistent_parts() {
        let err = MlpModel::from_parts(
            Array2::zeros((2, 3)),
            Array1::zeros(2),
            Array2::zeros((3, 1)),
            Array1::zeros(1),
            OutputActivation::Sigmoid,
            EncodingMap::identity(2),
        );
        assert!(err.is_err());
        let nan = MlpModel::from_parts(
            array![[f64::NAN]],
            array![0.0],
            array![[1.0]],
            array![0.0],
            OutputActivation::Sigmoid,
            EncodingMap::identity(1),
        );
        assert!(nan.is_err());
    }

    #[test]
    fn raising_output_bias_raises_scores() {
        let m = tiny(array![[0.3, -1.0], [2.0, 0.1]], array![0.1, 0.0], array![[1.0, -1.0], [0.5, 0.2]], array![0.0, 0.0]);
        let x = array![[1.0, 0.0], [-1.0, 2.0], [0.0, 0.0]];
        let before = m.predict(x.view()).unwrap();
        let after = m.with_output_bias(array![0.5, 0.0]).unwrap().predict(x.view()).unwrap();
        for i in 0..3 {
            assert!(after[[i, 0]] > before[[i, 0]]);
            assert_eq!(after[[i, 1]], before[[i, 1]]);
        }
    }

    fn constant_target_dataset() -> Dataset {
        let schema = FeatureSchema::new(
            vec![FeatureDef::categorical("c", ["a", "b"]), FeatureDef::numeric("t", 0.0, 10.0)],
            vec!["y".into(), "z".into()],
        )
        .unwrap();
        let raw = (0..20)
            .map(|i| vec![Value::category(if i % 3 == 0 { "a" } else { "b" }), Value::Number((i % 7) as f64)])
            .collect();
        Dataset::from_raw(schema, raw, vec![vec![0, 0]; 20]).unwrap()
    }

    #[test]
    fn constant_zero_targets_drive_scores_down() {
        let ds = constant_target_dataset();
        let model = train(&ds, &TrainConfig::default()).unwrap();
        let pred = model.predict(ds.encoded()).unwrap();
        assert!(pred.iter().all(|&s| s < 0.1));
        let meta = model.train_meta().unwrap();
        assert!(meta.final_loss < meta.initial_loss);
    }

    #[test]
    fn training_is_deterministic() {
        let ds = constant_target_dataset();
        let cfg = TrainConfig {
            epochs: 50,
            seed: 9,
            ..TrainConfig::default()
        };
        assert_eq!(train(&ds, &cfg).unwrap(), train(&ds, &cfg).unwrap());
    }

    #[test]
    fn divergence_reports_epoch() {
        let ds = constant_target_dataset();
        let cfg = TrainConfig {
            learning_rate: 1e300,
            epochs: 50,
            ..TrainConfig::default()
        };
        match train(&ds, &cfg) {
            Err(ModelError::NonFiniteLoss { epoch }) => assert!(epoch > 0 && epoch <= 50),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn holdout_is_reported() {
        let ds = constant_target_dataset();
        let cfg = TrainConfig {
            epochs: 20,
            holdout_fraction: 0.25,
            ..TrainConfig::default()
        };
        let meta = train(&ds, &cfg).unwrap().train_meta().cloned().unwrap();
        assert_eq!(meta.training_rows, 15);
        assert_eq!(meta.holdout.unwrap().rows, 5);
    }

    #[test]
    fn json_round_trip() {
        let ds = constant_target_dataset();
        let model = train(&ds, &TrainConfig { epochs: 5, ..TrainConfig::default() }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        model.save_json(&path).unwrap();
        assert_eq!(MlpModel::load_json(&path).unwrap(), model);
    }

    #[test]
    fn mean_prediction_of_full_assignment_is_single_row() {
        let ds = constant_target_dataset();
        let model = train(&ds, &TrainConfig { epochs: 30, ..TrainConfig::default() }).unwrap();
        let full = Assignment::new().with("c", "b").with("t", 3.0);
        let mean = mean_prediction(&model, &ds, &full).unwrap();
        let row = ds.encoded_under(&full).unwrap();
        let single = model.predict_row(row.row(0)).unwrap();
        for (a, b) in mean.iter().zip(&single) {
            assert!((a - b).abs() < 1e-12);
        }
        let empty = mean_prediction(&model, &ds, &Assignment::new()).unwrap();
        let raw_mean = model.predict(ds.encoded()).unwrap().mean_axis(Axis(0)).unwrap();
        assert_eq!(empty, raw_mean.to_vec());
    }
}
