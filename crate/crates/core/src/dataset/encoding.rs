use std::ops::Range;

use serde::{Deserialize, Serialize};

use super::schema::{FeatureDef, FeatureKind};
use crate::assignment::Value;

/// How one original feature maps onto encoded columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ColumnEncoding {
    /// One column per category, in declaration order.
    OneHot { categories: Vec<String> },
    /// Single column `(x - mean) / std`; `std == 0` marks a constant column
    /// that encodes to zero.
    Standardized { mean: f64, std: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureEncoding {
    pub feature: String,
    pub offset: usize,
    pub width: usize,
    pub encoding: ColumnEncoding,
}

impl FeatureEncoding {
    pub fn columns(&self) -> Range<usize> {
        self.offset..self.offset + self.width
    }

    /// Writes the encoding of `value` into `out`, which must be `width` long.
    /// The caller guarantees `value` has the right kind.
    pub fn encode_into(&self, value: &Value, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.width);
        match (&self.encoding, value) {
            (ColumnEncoding::OneHot { categories }, Value::Category(c)) => {
                for (slot, cat) in out.iter_mut().zip(categories) {
                    *slot = if cat == c { 1.0 } else { 0.0 };
                }
            }
            (ColumnEncoding::Standardized { mean, std }, Value::Number(x)) => {
                out[0] = if *std > 0.0 { (x - mean) / std } else { 0.0 };
            }
            _ => panic!("value {value} does not match encoding of feature '{}'", self.feature),
        }
    }
}

/// Per-feature slices of the encoded matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodingMap {
    pub features: Vec<FeatureEncoding>,
    pub width: usize,
}

impl EncodingMap {
    /// Fits one-hot and z-score encodings to the raw columns.
    pub(crate) fn fit(defs: &[FeatureDef], raw: &[Vec<Value>]) -> Self {
        let mut offset = 0;
        let mut features = Vec::with_capacity(defs.len());
        for (j, def) in defs.iter().enumerate() {
            let (encoding, width) = match &def.kind {
                FeatureKind::Categorical { categories } => (
                    ColumnEncoding::OneHot {
                        categories: categories.clone(),
                    },
                    categories.len(),
                ),
                FeatureKind::Numeric { .. } => {
                    let column: Vec<f64> = raw.iter().filter_map(|row| row[j].as_number()).collect();
                    let (mean, std) = population_moments(&column);
                    let std = if std <= 1e-12 * mean.abs().max(1.0) { 0.0 } else { std };
                    (ColumnEncoding::Standardized { mean, std }, 1)
                }
            };
            features.push(FeatureEncoding {
                feature: def.name.clone(),
                offset,
                width,
                encoding,
            });
            offset += width;
        }
        Self { features, width: offset }
    }

    /// Encoding for `p` plain numeric columns, each its own feature named
    /// `x0..x{p-1}`, passed through unchanged. Used for hand-built models.
    pub fn identity(p: usize) -> Self {
        Self {
            features: (0..p)
                .map(|j| FeatureEncoding {
                    feature: format!("x{j}"),
                    offset: j,
                    width: 1,
                    encoding: ColumnEncoding::Standardized { mean: 0.0, std: 1.0 },
                })
                .collect(),
            width: p,
        }
    }

    /// Identity-style map with explicit group widths; every column of a group
    /// passes through unchanged. Handy for testing grouped attribution.
    pub fn grouped(widths: &[usize]) -> Self {
        let mut offset = 0;
        let features = widths
            .iter()
            .enumerate()
            .map(|(j, &width)| {
                let enc = FeatureEncoding {
                    feature: format!("x{j}"),
                    offset,
                    width,
                    encoding: if width == 1 {
                        ColumnEncoding::Standardized { mean: 0.0, std: 1.0 }
                    } else {
                        ColumnEncoding::OneHot {
                            categories: (0..width).map(|c| format!("c{c}")).collect(),
                        }
                    },
                };
                offset += width;
                enc
            })
            .collect();
        Self { features, width: offset }
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    /// Encoded column ranges, one per original feature.
    pub fn groups(&self) -> Vec<Range<usize>> {
        self.features.iter().map(FeatureEncoding::columns).collect()
    }

    pub fn feature_names(&self) -> Vec<String> {
        self.features.iter().map(|f| f.feature.clone()).collect()
    }
}

/// Mean and population standard deviation.
pub(crate) fn population_moments(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}
