use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::fmt::real;

/// Named log-linear weights. Absent names weigh 0.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WeightVector(BTreeMap<String, f64>);

impl WeightVector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> f64 {
        self.0.get(name).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, name: impl Into<String>, value: f64) -> Result<()> {
        let name = name.into();
        if !value.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "weight {name:?} is not finite"
            )));
        }
        self.0.insert(name, value);
        Ok(())
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Dot product with a feature map; missing features contribute 0.
    pub fn dot(&self, features: &BTreeMap<String, f64>) -> f64 {
        features
            .iter()
            .filter_map(|(name, v)| self.0.get(name).map(|w| w * v))
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> WeightVector {
        WeightVector(self.0.iter().map(|(k, v)| (k.clone(), v * factor)).collect())
    }

    /// `name<TAB>value` lines.
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let mut weights = WeightVector::new();
        for (i, text) in super::utf8_lines(bytes)?.into_iter().enumerate() {
            let line = i + 1;
            if text.trim().is_empty() {
                continue;
            }
            let (name, value) = text
                .split_once('\t')
                .ok_or_else(|| Error::parse(line, "expected name<TAB>value"))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::parse(line, format!("invalid weight {value:?}")))?;
            if !value.is_finite() {
                return Err(Error::parse(line, "non-finite weight"));
            }
            if weights.0.insert(name.to_owned(), value).is_some() {
                return Err(Error::parse(line, format!("duplicate weight {name:?}")));
            }
        }
        Ok(weights)
    }

    pub fn render(&self) -> String {
        self.0
            .iter()
            .map(|(k, v)| format!("{k}\t{}\n", real(*v)))
            .collect()
    }
}

impl FromIterator<(String, f64)> for WeightVector {
    fn from_iter<T: IntoIterator<Item = (String, f64)>>(iter: T) -> Self {
        WeightVector(iter.into_iter().collect())
    }
}

impl<'a> FromIterator<(&'a str, f64)> for WeightVector {
    fn from_iter<T: IntoIterator<Item = (&'a str, f64)>>(iter: T) -> Self {
        WeightVector(iter.into_iter().map(|(k, v)| (k.to_owned(), v)).collect())
    }
}

pub fn read_weights(path: impl AsRef<Path>) -> Result<WeightVector> {
    WeightVector::parse(&super::read_bytes(path.as_ref())?)
}
