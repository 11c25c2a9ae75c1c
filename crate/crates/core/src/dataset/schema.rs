use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::DatasetError;
use crate::assignment::Value;

/// Kind and value domain of one input feature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FeatureKind {
    Categorical { categories: Vec<String> },
    Numeric { min: f64, max: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDef {
    pub name: String,
    #[serde(flatten)]
    pub kind: FeatureKind,
}

impl FeatureDef {
    pub fn categorical<S: Into<String>>(name: impl Into<String>, categories: impl IntoIterator<Item = S>) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Categorical {
                categories: categories.into_iter().map(Into::into).collect(),
            },
        }
    }

    pub fn numeric(name: impl Into<String>, min: f64, max: f64) -> Self {
        Self {
            name: name.into(),
            kind: FeatureKind::Numeric { min, max },
        }
    }

    pub fn is_categorical(&self) -> bool {
        matches!(self.kind, FeatureKind::Categorical { .. })
    }

    /// Position of `category` in the declared order, if this is a categorical feature.
    pub fn category_index(&self, category: &str) -> Option<usize> {
        match &self.kind {
            FeatureKind::Categorical { categories } => categories.iter().position(|c| c == category),
            FeatureKind::Numeric { .. } => None,
        }
    }

    /// Whether `value` has the right kind and lies within the declared domain.
    pub fn admits(&self, value: &Value) -> bool {
        match (&self.kind, value) {
            (FeatureKind::Categorical { categories }, Value::Category(c)) => categories.contains(c),
            (FeatureKind::Numeric { min, max }, Value::Number(x)) => x.is_finite() && *x >= *min && *x <= *max,
            _ => false,
        }
    }
}

/// Ordered feature definitions plus ordered label names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub features: Vec<FeatureDef>,
    pub labels: Vec<String>,
}

impl FeatureSchema {
    /// Builds a schema and checks its invariants.
    pub fn new(features: Vec<FeatureDef>, labels: Vec<String>) -> Result<Self, DatasetError> {
        let schema = Self { features, labels };
        schema.validate()?;
        Ok(schema)
    }

    pub fn from_json_file(path: &Path) -> Result<Self, DatasetError> {
        let text = std::fs::read_to_string(path).map_err(|source| DatasetError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let schema: Self =
            serde_json::from_str(&text).map_err(|e| DatasetError::InvalidSchema(format!("{}: {e}", path.display())))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        let invalid = |msg: String| Err(DatasetError::InvalidSchema(msg));
        if self.features.is_empty() {
            return invalid("schema declares no features".into());
        }
        if self.labels.is_empty() {
            return invalid("schema declares no labels".into());
        }
        let mut names = HashSet::new();
        for f in &self.features {
            if f.name.is_empty() {
                return invalid("feature with empty name".into());
            }
            if !names.insert(f.name.as_str()) {
                return invalid(format!("duplicate feature name '{}'", f.name));
            }
            match &f.kind {
                FeatureKind::Categorical { categories } => {
                    let distinct: HashSet<_> = categories.iter().collect();
                    if distinct.len() != categories.len() {
                        return invalid(format!("feature '{}' repeats a category", f.name));
                    }
                    if categories.len() < 2 {
                        return invalid(format!("feature '{}' needs at least 2 categories", f.name));
                    }
                }
                FeatureKind::Numeric { min, max } => {
                    if !(min.is_finite() && max.is_finite() && min < max) {
                        return invalid(format!("feature '{}' needs finite min < max", f.name));
                    }
                }
            }
        }
        let mut label_names = HashSet::new();
        for l in &self.labels {
            if l.is_empty() {
                return invalid("label with empty name".into());
            }
            if !label_names.insert(l.as_str()) {
                return invalid(format!("duplicate label name '{l}'"));
            }
            if names.contains(l.as_str()) {
                return invalid(format!("label '{l}' collides with a feature name"));
            }
        }
        Ok(())
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn n_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    pub fn feature(&self, name: &str) -> Option<&FeatureDef> {
        self.features.iter().find(|f| f.name == name)
    }

    /// CSV header: feature names then `label:<name>` columns.
    pub fn csv_header(&self) -> Vec<String> {
        self.features
            .iter()
            .map(|f| f.name.clone())
            .chain(self.labels.iter().map(|l| format!("{LABEL_PREFIX}{l}")))
            .collect()
    }
}

pub const LABEL_PREFIX: &str = "label:";
