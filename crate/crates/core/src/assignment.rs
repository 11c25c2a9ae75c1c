use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A single cell value: either a category label or a number.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Number(f64),
    Category(String),
}

impl Value {
    pub fn category(s: impl Into<String>) -> Self {
        Value::Category(s.into())
    }

    pub fn as_number(&self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(*x),
            Value::Category(_) => None,
        }
    }

    pub fn as_category(&self) -> Option<&str> {
        match self {
            Value::Category(s) => Some(s),
            Value::Number(_) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(x) => write!(f, "{x}"),
            Value::Category(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Number(x)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Category(s.to_string())
    }
}

/// A partial map from feature name to a fixed value.
///
/// Bindings are kept sorted by feature name, so iteration order (and the
/// textual form) is canonical regardless of insertion order.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment {
    bindings: BTreeMap<String, Value>,
}

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    /// Returns a copy with one more binding. Rebinding an existing feature
    /// replaces its value.
    pub fn with(mut self, feature: impl Into<String>, value: impl Into<Value>) -> Self {
        self.bindings.insert(feature.into(), value.into());
        self
    }

    pub fn insert(&mut self, feature: impl Into<String>, value: impl Into<Value>) -> Option<Value> {
        self.bindings.insert(feature.into(), value.into())
    }

    pub fn get(&self, feature: &str) -> Option<&Value> {
        self.bindings.get(feature)
    }

    pub fn contains(&self, feature: &str) -> bool {
        self.bindings.contains_key(feature)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Value)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// True when every binding of `other` is also present here with the same value.
    pub fn contains_all(&self, other: &Assignment) -> bool {
        other.iter().all(|(f, v)| self.get(f) == Some(v))
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, value)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(";")?;
            }
            write!(f, "{name}={value}")?;
        }
        Ok(())
    }
}

impl<K: Into<String>, V: Into<Value>> FromIterator<(K, V)> for Assignment {
    fn from_iter<I: IntoIterator<Item = (K, V)>>(iter: I) -> Self {
        Self {
            bindings: iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn display_is_sorted_by_feature() {
        let a = Assignment::new().with("b", "x").with("a", 2.5);
        assert_eq!(a.to_string(), "a=2.5;b=x");
    }

    #[test]
    fn value_json_is_untagged() {
        let a = Assignment::new().with("t", 3.0).with("c", "yes");
        let s = serde_json::to_string(&a).unwrap();
        assert_eq!(s, r#"{"c":"yes","t":3.0}"#);
        let back: Assignment = serde_json::from_str(&s).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn contains_all_checks_values() {
        let a = Assignment::new().with("f0", "v1").with("f1", "v2");
        assert!(a.contains_all(&Assignment::new().with("f0", "v1")));
        assert!(!a.contains_all(&Assignment::new().with("f0", "v2")));
        assert!(a.contains_all(&Assignment::new()));
    }
}
