//! Benchmark datasets: loading, normalization, positional splits and input
//! discretization.
//!
//! Patterns keep their file order throughout; the train/test split is the
//! first `train_count` patterns versus the rest.

mod bundled;
mod discretize;
mod schema;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bundled::{bundled, bundled_names, bundled_schema};
pub use discretize::{discretize_inputs, inconsistency_rate, AttributeBins, Cut, DiscretizedView};
pub use schema::{
    AttributeKind, AttributeSpec, DatasetSchema, Delimiter, NormalizationMethod, ThresholdUnits,
    SCHEMA_FORMAT,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pattern {
    /// Values in original units. Categorical values hold their category code.
    pub raw: Vec<f64>,
    /// Unit-interval view. Empty until the dataset is normalized.
    pub normalized: Vec<f64>,
    pub class_index: usize,
}

/// Per-attribute affine map from original units to `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Transform {
    MinMax {
        min: f64,
        max: f64,
    },
    Scale {
        factor: f64,
    },
    /// Attribute was constant on the fitting set; normalizes to 0.
    Constant {
        value: f64,
    },
    Categorical {
        levels: usize,
    },
}

impl Transform {
    pub fn apply(&self, x: f64) -> f64 {
        let y = match *self {
            Transform::MinMax { min, max } => (x - min) / (max - min),
            Transform::Scale { factor } => x / factor,
            Transform::Constant { .. } => 0.0,
            Transform::Categorical { levels } if levels > 1 => x / (levels - 1) as f64,
            Transform::Categorical { .. } => 0.0,
        };
        y.clamp(0.0, 1.0)
    }

    pub fn invert(&self, y: f64) -> f64 {
        match *self {
            Transform::MinMax { min, max } => min + y * (max - min),
            Transform::Scale { factor } => y * factor,
            Transform::Constant { value } => value,
            Transform::Categorical { levels } if levels > 1 => y * (levels - 1) as f64,
            Transform::Categorical { .. } => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationMap {
    pub transforms: Vec<Transform>,
}

impl NormalizationMap {
    /// Fits the schema's normalization method on `ds`'s raw values.
    pub fn fit(ds: &Dataset) -> Self {
        let transforms = ds
            .schema
            .attributes
            .iter()
            .enumerate()
            .map(|(a, spec)| {
                if spec.kind == AttributeKind::Categorical {
                    return Transform::Categorical {
                        levels: spec.categories.len(),
                    };
                }
                match ds.schema.normalization {
                    NormalizationMethod::Scale { factor } => Transform::Scale { factor },
                    NormalizationMethod::MinMax => {
                        let (min, max) = ds
                            .patterns
                            .iter()
                            .map(|p| p.raw[a])
                            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                                (lo.min(v), hi.max(v))
                            });
                        if max > min {
                            Transform::MinMax { min, max }
                        } else {
                            Transform::Constant {
                                value: if min.is_finite() { min } else { 0.0 },
                            }
                        }
                    }
                }
            })
            .collect();
        NormalizationMap { transforms }
    }

    pub fn normalize(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .zip(&self.transforms)
            .map(|(&x, t)| t.apply(x))
            .collect()
    }

    pub fn denormalize(&self, attribute: usize, y: f64) -> f64 {
        self.transforms[attribute].invert(y)
    }

    pub fn is_constant(&self, attribute: usize) -> bool {
        matches!(self.transforms[attribute], Transform::Constant { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub schema: DatasetSchema,
    pub patterns: Vec<Pattern>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalization: Option<NormalizationMap>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn attribute_count(&self) -> usize {
        self.schema.attribute_count()
    }

    pub fn class_count(&self) -> usize {
        self.schema.class_count()
    }

    pub fn classes(&self) -> Vec<usize> {
        self.patterns.iter().map(|p| p.class_index).collect()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalization.is_some()
    }

    /// One-hot target vector for pattern `i`.
    pub fn target(&self, i: usize) -> Vec<f64> {
        let mut t = vec![0.0; self.class_count()];
        t[self.patterns[i].class_index] = 1.0;
        t
    }

    /// Fraction of patterns belonging to the most frequent class.
    pub fn majority_fraction(&self) -> f64 {
        let mut counts = vec![0usize; self.class_count()];
        for p in &self.patterns {
            counts[p.class_index] += 1;
        }
        let best = counts.iter().copied().max().unwrap_or(0);
        best as f64 / self.len().max(1) as f64
    }

    /// Normalizes with a map fitted on this dataset. Raw values are untouched.
    pub fn normalize(&self) -> Dataset {
        let map = NormalizationMap::fit(self);
        self.normalize_with(&map)
    }

    /// Normalizes with an existing map, e.g. the training split's. Values outside
    /// the fitted range clamp to `[0, 1]`.
    pub fn normalize_with(&self, map: &NormalizationMap) -> Dataset {
        let patterns = self
            .patterns
            .iter()
            .map(|p| Pattern {
                raw: p.raw.clone(),
                normalized: map.normalize(&p.raw),
                class_index: p.class_index,
            })
            .collect();
        Dataset {
            schema: self.schema.clone(),
            patterns,
            normalization: Some(map.clone()),
        }
    }

    /// Positional split: the first `train_count` patterns train, the rest test.
    pub fn split(&self, train_count: usize) -> Result<(Dataset, Dataset)> {
        if train_count == 0 || train_count >= self.len() {
            return Err(Error::DegenerateSplit {
                train_count,
                total: self.len(),
            });
        }
        let part = |patterns: &[Pattern]| Dataset {
            schema: self.schema.clone(),
            patterns: patterns.to_vec(),
            normalization: self.normalization.clone(),
        };
        Ok((
            part(&self.patterns[..train_count]),
            part(&self.patterns[train_count..]),
        ))
    }

    /// Formats a raw attribute value for display, honoring categorical names.
    pub fn format_value(&self, attribute: usize, raw: f64) -> String {
        let spec = &self.schema.attributes[attribute];
        match spec.kind {
            AttributeKind::Categorical => spec
                .categories
                .get(raw as usize)
                .cloned()
                .unwrap_or_else(|| raw.to_string()),
            _ => raw.to_string(),
        }
    }
}

/// Parses delimiter-separated rows according to `schema`.
///
/// Missing cells are imputed with the rounded mean of the attribute over the
/// training split (the first `schema.train_count` rows, or all rows when the
/// schema has no split). Categorical gaps take the most frequent category.
pub fn load_dataset(source: &str, schema: &DatasetSchema) -> Result<Dataset> {
    schema.validate()?;
    let arity = schema.attribute_count() + 1 + usize::from(schema.leading_id);
    let mut cells: Vec<Vec<Option<f64>>> = Vec::new();
    let mut classes = Vec::new();

    for (line_no, line) in source.lines().enumerate() {
        let row = line_no + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = match schema.delimiter {
            Delimiter::Comma => line.split(',').map(str::trim).collect(),
            Delimiter::Whitespace => line.split_whitespace().collect(),
        };
        if fields.len() != arity {
            return Err(Error::Load {
                row,
                message: format!("expected {arity} fields, found {}", fields.len()),
            });
        }
        let values = &fields[usize::from(schema.leading_id)..arity - 1];
        let mut parsed = Vec::with_capacity(values.len());
        for (attr, token) in schema.attributes.iter().zip(values) {
            if *token == schema.missing_marker {
                parsed.push(None);
                continue;
            }
            let value = match attr.kind {
                AttributeKind::Categorical => attr
                    .categories
                    .iter()
                    .position(|c| c == token)
                    .map(|i| i as f64)
                    .ok_or_else(|| Error::Load {
                        row,
                        message: format!("unknown category {token:?} for {:?}", attr.name),
                    })?,
                _ => token.parse::<f64>().map_err(|_| Error::Load {
                    row,
                    message: format!("unparseable value {token:?} for {:?}", attr.name),
                })?,
            };
            if !value.is_finite() {
                return Err(Error::Load {
                    row,
                    message: format!("non-finite value for {:?}", attr.name),
                });
            }
            parsed.push(Some(value));
        }
        let label = fields[arity - 1];
        let class = schema
            .class_index(label)
            .ok_or_else(|| Error::Schema(format!("row {row}: unknown class label {label:?}")))?;
        cells.push(parsed);
        classes.push(class);
    }

    if cells.is_empty() {
        return Err(Error::NoPatterns);
    }

    let fit_rows = schema.train_count.unwrap_or(cells.len()).min(cells.len());
    let fills: Vec<f64> = schema
        .attributes
        .iter()
        .enumerate()
        .map(|(a, attr)| {
            let present = cells[..fit_rows].iter().filter_map(|r| r[a]);
            match attr.kind {
                AttributeKind::Categorical => {
                    let mut counts = vec![0usize; attr.categories.len()];
                    for v in present {
                        counts[v as usize] += 1;
                    }
                    // first maximum wins
                    let mut best = 0;
                    for (i, &c) in counts.iter().enumerate() {
                        if c > counts[best] {
                            best = i;
                        }
                    }
                    best as f64
                }
                _ => {
                    let (sum, n) = present.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
                    if n == 0 {
                        0.0
                    } else {
                        (sum / n as f64).round()
                    }
                }
            }
        })
        .collect();

    let patterns = cells
        .into_iter()
        .zip(classes)
        .map(|(row, class_index)| Pattern {
            raw: row
                .into_iter()
                .enumerate()
                .map(|(a, v)| v.unwrap_or(fills[a]))
                .collect(),
            normalized: Vec::new(),
            class_index,
        })
        .collect();

    Ok(Dataset {
        schema: schema.clone(),
        patterns,
        normalization: None,
    })
}

pub fn load_dataset_file(path: impl AsRef<Path>, schema: &DatasetSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_dataset(&text, schema)
}

pub fn load_schema_file(path: impl AsRef<Path>) -> Result<DatasetSchema> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    DatasetSchema::from_toml(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema(kinds: &[AttributeKind]) -> DatasetSchema {
        DatasetSchema {
            format: SCHEMA_FORMAT.into(),
            name: "toy".into(),
            delimiter: Delimiter::Comma,
            leading_id: false,
            missing_marker: "?".into(),
            class_labels: vec!["a".into(), "b".into()],
            class_names: vec!["a".into(), "b".into()],
            train_count: None,
            normalization: NormalizationMethod::MinMax,
            threshold_units: ThresholdUnits::Raw,
            precision: 1,
            attributes: kinds
                .iter()
                .enumerate()
                .map(|(i, &kind)| AttributeSpec {
                    name: format!("x{i}"),
                    kind,
                    min: None,
                    max: None,
                    categories: if kind == AttributeKind::Categorical {
                        vec!["no".into(), "yes".into()]
                    } else {
                        vec![]
                    },
                })
                .collect(),
        }
    }

    #[test]
    fn empty_source_is_an_error() {
        let s = schema(&[AttributeKind::Continuous]);
        assert!(matches!(load_dataset("\n\n", &s), Err(Error::NoPatterns)));
    }

    #[test]
    fn wrong_arity_names_the_row() {
        let s = schema(&[AttributeKind::Continuous]);
        let err = load_dataset("1.0,a\n2.0,3.0,b\n", &s).unwrap_err();
        assert!(matches!(err, Error::Load { row: 2, .. }), "{err}");
    }

    #[test]
    fn unparseable_value_names_the_row() {
        let s = schema(&[AttributeKind::Continuous]);
        let err = load_dataset("1.0,a\nxx,b\n", &s).unwrap_err();
        assert!(matches!(err, Error::Load { row: 2, .. }));
    }

    #[test]
    fn unknown_class_is_a_schema_error() {
        let s = schema(&[AttributeKind::Continuous]);
        assert!(matches!(load_dataset("1.0,c\n", &s), Err(Error::Schema(_))));
    }

    #[test]
    fn missing_cells_take_rounded_training_mean() {
        let mut s = schema(&[AttributeKind::Ordinal]);
        s.train_count = Some(3);
        let ds = load_dataset("1,a\n2,a\n4,b\n?,b\n100,b\n", &s).unwrap();
        // mean of 1, 2, 4 = 2.33 -> 2; the row after the split point is ignored
        assert_eq!(ds.patterns[3].raw[0], 2.0);
    }

    #[test]
    fn identity_normalization_on_unit_range() {
        let s = schema(&[AttributeKind::Continuous]);
        let ds = load_dataset("0,a\n0.25,a\n1,b\n", &s).unwrap().normalize();
        let got: Vec<f64> = ds.patterns.iter().map(|p| p.normalized[0]).collect();
        assert_eq!(got, vec![0.0, 0.25, 1.0]);
    }

    #[test]
    fn min_max_hand_value() {
        let t = Transform::MinMax { min: 1.0, max: 6.9 };
        assert!((t.apply(1.9) - 0.9 / 5.9).abs() < 1e-12);
        assert!((t.apply(1.9) - 0.1525).abs() < 1e-4);
    }

    #[test]
    fn constant_attribute_normalizes_to_zero() {
        let s = schema(&[AttributeKind::Continuous, AttributeKind::Continuous]);
        let ds = load_dataset("3,0,a\n3,1,b\n", &s).unwrap().normalize();
        let map = ds.normalization.as_ref().unwrap();
        assert!(map.is_constant(0));
        assert!(ds.patterns.iter().all(|p| p.normalized[0] == 0.0));
        assert_eq!(map.denormalize(0, 0.0), 3.0);
    }

    #[test]
    fn categorical_codes_spread_over_unit_interval() {
        let s = schema(&[AttributeKind::Categorical]);
        let ds = load_dataset("no,a\nyes,b\n", &s).unwrap().normalize();
        assert_eq!(ds.patterns[0].normalized, vec![0.0]);
        assert_eq!(ds.patterns[1].normalized, vec![1.0]);
    }

    #[test]
    fn test_split_clamps_out_of_range_values() {
        let s = schema(&[AttributeKind::Continuous]);
        let ds = load_dataset("0,a\n10,b\n-5,a\n20,b\n", &s).unwrap();
        let (train, test) = ds.split(2).unwrap();
        let train = train.normalize();
        let test = test.normalize_with(train.normalization.as_ref().unwrap());
        assert_eq!(test.patterns[0].normalized[0], 0.0);
        assert_eq!(test.patterns[1].normalized[0], 1.0);
    }

    #[test]
    fn degenerate_splits_are_rejected() {
        let s = schema(&[AttributeKind::Continuous]);
        let ds = load_dataset("0,a\n1,b\n", &s).unwrap();
        assert!(matches!(ds.split(0), Err(Error::DegenerateSplit { .. })));
        assert!(matches!(ds.split(2), Err(Error::DegenerateSplit { .. })));
        let (a, b) = ds.split(1).unwrap();
        assert_eq!((a.len(), b.len()), (1, 1));
    }

    #[test]
    fn duplicate_attribute_names_rejected() {
        let mut s = schema(&[AttributeKind::Continuous, AttributeKind::Continuous]);
        s.attributes[1].name = "x0".into();
        assert!(s.validate().is_err());
    }
}
