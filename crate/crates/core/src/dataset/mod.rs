//! Tabular multi-label datasets: schema validation, CSV IO, dense encoding,
//! candidate value grids, and fixing features to values.
//!
//! Categorical features are one-hot encoded in declaration order; numeric
//! features are z-scored with the population standard deviation. A constant
//! numeric column encodes to all zeros.

mod encoding;
mod schema;
pub mod synthetic;

use std::io::{Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use encoding::{ColumnEncoding, EncodingMap, FeatureEncoding};
pub use schema::{FeatureDef, FeatureKind, FeatureSchema, LABEL_PREFIX};
pub use synthetic::{generate_synthetic, PlantedTruth, SyntheticSpec};

use crate::assignment::{Assignment, Value};

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("cannot read '{path}': {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid schema: {0}")]
    InvalidSchema(String),
    #[error("missing column '{column}'")]
    MissingColumn { column: String },
    #[error("unexpected column '{column}'")]
    UnexpectedColumn { column: String },
    #[error("type mismatch at row {row}, column '{column}': '{cell}'")]
    TypeMismatch { row: usize, column: String, cell: String },
    #[error("unknown category '{cell}' at row {row}, column '{column}'")]
    UnknownCategory { row: usize, column: String, cell: String },
    #[error("value {cell} out of declared range at row {row}, column '{column}'")]
    OutOfRange { row: usize, column: String, cell: String },
    #[error("dataset has no rows")]
    EmptyDataset,
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("unknown feature '{0}'")]
    UnknownFeature(String),
    #[error("value {value} is outside the domain of feature '{feature}'")]
    ValueOutOfDomain { feature: String, value: String },
}

/// Validated samples with their dense encoding and binary targets.
///
/// Immutable after construction.
#[derive(Debug, Clone)]
pub struct Dataset {
    schema: FeatureSchema,
    raw: Vec<Vec<Value>>,
    targets: Array2<f64>,
    encoded: Array2<f64>,
    encoding_map: EncodingMap,
}

impl Dataset {
    /// Validates raw cells and targets and fits the encoding.
    ///
    /// Rows are indexed from 0 in error locations.
    pub fn from_raw(schema: FeatureSchema, raw: Vec<Vec<Value>>, targets: Vec<Vec<u8>>) -> Result<Self, DatasetError> {
        schema.validate()?;
        if raw.is_empty() {
            return Err(DatasetError::EmptyDataset);
        }
        let n = schema.n_features();
        let n_labels = schema.n_labels();
        if targets.len() != raw.len() {
            return Err(DatasetError::MissingColumn {
                column: format!("{LABEL_PREFIX}*"),
            });
        }
        for (row, cells) in raw.iter().enumerate() {
            if cells.len() != n {
                return Err(DatasetError::MissingColumn {
                    column: schema.features[cells.len().min(n.saturating_sub(1))].name.clone(),
                });
            }
            for (def, cell) in schema.features.iter().zip(cells) {
                check_cell(def, cell, row)?;
            }
        }
        let mut target_matrix = Array2::zeros((raw.len(), n_labels));
        for (row, t) in targets.iter().enumerate() {
            if t.len() != n_labels {
                return Err(DatasetError::MissingColumn {
                    column: format!("{LABEL_PREFIX}{}", schema.labels[t.len().min(n_labels - 1)]),
                });
            }
            for (l, &v) in t.iter().enumerate() {
                if v > 1 {
                    return Err(DatasetError::TypeMismatch {
                        row,
                        column: format!("{LABEL_PREFIX}{}", schema.labels[l]),
                        cell: v.to_string(),
                    });
                }
                target_matrix[[row, l]] = f64::from(v);
            }
        }
        let encoding_map = EncodingMap::fit(&schema.features, &raw);
        let encoded = encode_all(&encoding_map, &raw);
        Ok(Self {
            schema,
            raw,
            targets: target_matrix,
            encoded,
            encoding_map,
        })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn raw(&self) -> &[Vec<Value>] {
        &self.raw
    }

    pub fn targets(&self) -> ArrayView2<'_, f64> {
        self.targets.view()
    }

    pub fn encoded(&self) -> ArrayView2<'_, f64> {
        self.encoded.view()
    }

    pub fn encoded_row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.encoded.row(i)
    }

    pub fn encoding_map(&self) -> &EncodingMap {
        &self.encoding_map
    }

    /// Number of samples `m`.
    pub fn n_samples(&self) -> usize {
        self.raw.len()
    }

    pub fn n_features(&self) -> usize {
        self.schema.n_features()
    }

    pub fn n_labels(&self) -> usize {
        self.schema.n_labels()
    }

    /// Encoded width `p`.
    pub fn width(&self) -> usize {
        self.encoding_map.width
    }

    /// Returns a dataset holding only the given rows, re-encoded from scratch.
    pub fn subset(&self, rows: &[usize]) -> Result<Self, DatasetError> {
        let raw = rows.iter().map(|&i| self.raw[i].clone()).collect();
        let targets = rows
            .iter()
            .map(|&i| self.targets.row(i).iter().map(|&t| t as u8).collect())
            .collect();
        Self::from_raw(self.schema.clone(), raw, targets)
    }

    /// Checks an assignment against the schema and resolves feature indices.
    pub fn resolve(&self, assignment: &Assignment) -> Result<Vec<(usize, Value)>, DatasetError> {
        assignment
            .iter()
            .map(|(name, value)| {
                let j = self
                    .schema
                    .feature_index(name)
                    .ok_or_else(|| DatasetError::UnknownFeature(name.to_string()))?;
                if !self.schema.features[j].admits(value) {
                    return Err(DatasetError::ValueOutOfDomain {
                        feature: name.to_string(),
                        value: value.to_string(),
                    });
                }
                Ok((j, value.clone()))
            })
            .collect()
    }

    /// Encoded matrix with the resolved bindings overwritten on every row,
    /// using this dataset's fitted encoding.
    pub(crate) fn encoded_with(&self, bindings: &[(usize, Value)]) -> Array2<f64> {
        let mut out = self.encoded.clone();
        for (j, value) in bindings {
            let enc = &self.encoding_map.features[*j];
            let mut slot = vec![0.0; enc.width];
            enc.encode_into(value, &mut slot);
            let cols = enc.columns();
            for mut row in out.rows_mut() {
                for (c, &v) in cols.clone().zip(&slot) {
                    row[c] = v;
                }
            }
        }
        out
    }

    /// Encoded matrix under `assignment`, without copying the raw table.
    pub fn encoded_under(&self, assignment: &Assignment) -> Result<Array2<f64>, DatasetError> {
        let bindings = self.resolve(assignment)?;
        Ok(self.encoded_with(&bindings))
    }

    /// Writes the raw table back out in the CSV layout accepted by [`load_csv`].
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<(), DatasetError> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(self.schema.csv_header())?;
        for (cells, t) in self.raw.iter().zip(self.targets.rows()) {
            let record = cells
                .iter()
                .map(Value::to_string)
                .chain(t.iter().map(|&x| (x as u8).to_string()));
            w.write_record(record)?;
        }
        w.flush().map_err(|source| DatasetError::Io {
            path: "<csv writer>".into(),
            source,
        })?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }
}

fn check_cell(def: &FeatureDef, cell: &Value, row: usize) -> Result<(), DatasetError> {
    let loc = |cell: &Value| (row, def.name.clone(), cell.to_string());
    match (&def.kind, cell) {
        (FeatureKind::Categorical { categories }, Value::Category(c)) => {
            if categories.contains(c) {
                Ok(())
            } else {
                let (row, column, cell) = loc(cell);
                Err(DatasetError::UnknownCategory { row, column, cell })
            }
        }
        (FeatureKind::Numeric { min, max }, Value::Number(x)) => {
            if x.is_finite() && x >= min && x <= max {
                Ok(())
            } else {
                let (row, column, cell) = loc(cell);
                Err(DatasetError::OutOfRange { row, column, cell })
            }
        }
        _ => {
            let (row, column, cell) = loc(cell);
            Err(DatasetError::TypeMismatch { row, column, cell })
        }
    }
}

fn encode_all(map: &EncodingMap, raw: &[Vec<Value>]) -> Array2<f64> {
    let mut out = Array2::zeros((raw.len(), map.width));
    let mut slot = Vec::new();
    for (i, cells) in raw.iter().enumerate() {
        for (enc, cell) in map.features.iter().zip(cells) {
            slot.clear();
            slot.resize(enc.width, 0.0);
            enc.encode_into(cell, &mut slot);
            for (c, &v) in enc.columns().zip(&slot) {
                out[[i, c]] = v;
            }
        }
    }
    out
}

/// Reads a dataset from CSV. The header must name every schema feature and
/// every label as `label:<name>`; column order is free.
pub fn load_csv(path: &Path, schema: &FeatureSchema) -> Result<Dataset, DatasetError> {
    let file = std::fs::File::open(path).map_err(|source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    })?;
    read_csv(file, schema)
}

pub fn read_csv<R: Read>(reader: R, schema: &FeatureSchema) -> Result<Dataset, DatasetError> {
    schema.validate()?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let expected = schema.csv_header();
    for h in &header {
        if !expected.contains(h) {
            return Err(DatasetError::UnexpectedColumn { column: h.clone() });
        }
    }
    let positions = expected
        .iter()
        .map(|name| {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| DatasetError::MissingColumn { column: name.clone() })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let n = schema.n_features();

    let mut raw = Vec::new();
    let mut targets = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let mut cells = Vec::with_capacity(n);
        for (def, &pos) in schema.features.iter().zip(&positions[..n]) {
            let text = record.get(pos).unwrap_or("");
            let value = match &def.kind {
                FeatureKind::Categorical { .. } => Value::Category(text.to_string()),
                FeatureKind::Numeric { .. } => match text.parse::<f64>() {
                    Ok(x) => Value::Number(x),
                    Err(_) => {
                        return Err(DatasetError::TypeMismatch {
                            row,
                            column: def.name.clone(),
                            cell: text.to_string(),
                        })
                    }
                },
            };
            check_cell(def, &value, row)?;
            cells.push(value);
        }
        let mut t = Vec::with_capacity(schema.n_labels());
        for (name, &pos) in expected[n..].iter().zip(&positions[n..]) {
            let text = record.get(pos).unwrap_or("");
            match text {
                "0" => t.push(0),
                "1" => t.push(1),
                _ => {
                    return Err(DatasetError::TypeMismatch {
                        row,
                        column: name.clone(),
                        cell: text.to_string(),
                    })
                }
            }
        }
        raw.push(cells);
        targets.push(t);
    }
    Dataset::from_raw(schema.clone(), raw, targets)
}

/// Candidate values of one feature explored by the search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueDomain {
    pub feature: String,
    pub candidates: Vec<Value>,
}

impl ValueDomain {
    pub fn index_of(&self, value: &Value) -> Option<usize> {
        self.candidates.iter().position(|c| c == value)
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    /// Index of the candidate closest to `x` (numeric domains; earlier wins ties).
    pub fn nearest(&self, x: f64) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, c) in self.candidates.iter().enumerate() {
            if let Value::Number(v) = c {
                let d = (v - x).abs();
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((i, d));
                }
            }
        }
        best.map(|(i, _)| i)
    }
}

/// Candidate domains for every feature, in schema order.
///
/// Categorical features yield their declared categories. Numeric features
/// yield `grid_size` linearly interpolated empirical quantiles at positions
/// `k/(grid_size-1) * (m-1)` of the sorted column, with duplicates removed.
///
/// # Panics
/// If `grid_size < 2`.
pub fn candidate_values(dataset: &Dataset, grid_size: usize) -> Vec<ValueDomain> {
    assert!(grid_size >= 2, "grid_size must be at least 2");
    dataset
        .schema
        .features
        .iter()
        .enumerate()
        .map(|(j, def)| {
            let candidates = match &def.kind {
                FeatureKind::Categorical { categories } => categories.iter().cloned().map(Value::Category).collect(),
                FeatureKind::Numeric { .. } => {
                    let mut column: Vec<f64> = dataset.raw.iter().filter_map(|r| r[j].as_number()).collect();
                    column.sort_by(f64::total_cmp);
                    let mut grid = quantile_grid(&column, grid_size);
                    grid.dedup();
                    grid.into_iter().map(Value::Number).collect()
                }
            };
            ValueDomain {
                feature: def.name.clone(),
                candidates,
            }
        })
        .collect()
}

fn quantile_grid(sorted: &[f64], q: usize) -> Vec<f64> {
    let last = (sorted.len() - 1) as f64;
    (0..q)
        .map(|k| {
            let pos = k as f64 / (q - 1) as f64 * last;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
        })
        .collect()
}

/// Copy of `dataset` with every sample's assigned features overwritten.
///
/// Re-encoding uses the original encoding map, so means, deviations and
/// category order are unchanged.
pub fn apply_assignment(dataset: &Dataset, assignment: &Assignment) -> Result<Dataset, DatasetError> {
    let bindings = dataset.resolve(assignment)?;
    let mut out = dataset.clone();
    for row in out.raw.iter_mut() {
        for (j, value) in &bindings {
            row[*j] = value.clone();
        }
    }
    out.encoded = dataset.encoded_with(&bindings);
    Ok(out)
}
