use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA_FORMAT: &str = "reann-schema/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttributeKind {
    Continuous,
    Ordinal,
    Categorical,
}

impl AttributeKind {
    pub fn is_ordered(self) -> bool {
        !matches!(self, AttributeKind::Categorical)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    pub kind: AttributeKind,
    /// Declared lower bound of the value domain, when fixed (e.g. 1..10 scores).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max: Option<f64>,
    /// Category names for categorical attributes, in code order.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Delimiter {
    #[default]
    Comma,
    Whitespace,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum NormalizationMethod {
    /// Min-max over the patterns the map is fitted on.
    #[default]
    MinMax,
    /// Divide by a fixed factor (breast-cancer 1..10 scores use 10).
    Scale { factor: f64 },
}

/// Units in which rule thresholds are displayed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdUnits {
    #[default]
    Raw,
    Normalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSchema {
    #[serde(default = "default_format")]
    pub format: String,
    pub name: String,
    #[serde(default)]
    pub delimiter: Delimiter,
    /// First column is a record identifier and is skipped.
    #[serde(default)]
    pub leading_id: bool,
    #[serde(default = "default_missing")]
    pub missing_marker: String,
    /// Class tokens as they appear in the data file.
    pub class_labels: Vec<String>,
    /// Display names, parallel to `class_labels`. Defaults to the labels.
    #[serde(default)]
    pub class_names: Vec<String>,
    /// Positional train/test split point. `None` means the whole file trains and tests.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_count: Option<usize>,
    #[serde(default)]
    pub normalization: NormalizationMethod,
    #[serde(default)]
    pub threshold_units: ThresholdUnits,
    #[serde(default = "default_precision")]
    pub precision: u32,
    pub attributes: Vec<AttributeSpec>,
}

fn default_format() -> String {
    SCHEMA_FORMAT.to_string()
}

fn default_missing() -> String {
    "?".to_string()
}

fn default_precision() -> u32 {
    2
}

impl DatasetSchema {
    pub fn from_toml(text: &str) -> Result<Self> {
        let mut schema: DatasetSchema =
            toml::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if schema.class_names.is_empty() {
            schema.class_names = schema.class_labels.clone();
        }
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != SCHEMA_FORMAT {
            return Err(Error::Schema(format!(
                "unsupported schema format {:?}",
                self.format
            )));
        }
        if self.attributes.is_empty() {
            return Err(Error::Schema("no attributes".into()));
        }
        let mut names = BTreeSet::new();
        for attr in &self.attributes {
            if !names.insert(attr.name.as_str()) {
                return Err(Error::Schema(format!(
                    "duplicate attribute {:?}",
                    attr.name
                )));
            }
            match attr.kind {
                AttributeKind::Categorical if attr.categories.is_empty() => {
                    return Err(Error::Schema(format!(
                        "categorical attribute {:?} has no categories",
                        attr.name
                    )));
                }
                AttributeKind::Categorical => {
                    let unique: BTreeSet<_> = attr.categories.iter().collect();
                    if unique.len() != attr.categories.len() {
                        return Err(Error::Schema(format!(
                            "attribute {:?} repeats a category",
                            attr.name
                        )));
                    }
                }
                _ => {}
            }
        }
        if self.class_labels.is_empty() {
            return Err(Error::Schema("class_labels is empty".into()));
        }
        let unique: BTreeSet<_> = self.class_labels.iter().collect();
        if unique.len() != self.class_labels.len() {
            return Err(Error::Schema("class_labels are not unique".into()));
        }
        if self.class_names.len() != self.class_labels.len() {
            return Err(Error::Schema(
                "class_names and class_labels differ in length".into(),
            ));
        }
        if let NormalizationMethod::Scale { factor } = self.normalization {
            if !(factor > 0.0) {
                return Err(Error::Schema("scale factor must be positive".into()));
            }
        }
        Ok(())
    }

    pub fn attribute_count(&self) -> usize {
        self.attributes.len()
    }

    pub fn class_count(&self) -> usize {
        self.class_labels.len()
    }

    pub fn class_index(&self, token: &str) -> Option<usize> {
        self.class_labels.iter().position(|l| l == token)
    }

    /// Short label used in rendered rules, e.g. `A3`.
    pub fn attribute_tag(&self, index: usize) -> String {
        format!("A{}", index + 1)
    }
}
