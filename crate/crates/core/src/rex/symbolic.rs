//! Rules over input attributes in original units.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::{
    AttributeBins, AttributeKind, Dataset, DatasetSchema, DiscretizedView, NormalizationMap,
    ThresholdUnits, Transform,
};
use crate::error::{Error, Result};

use super::{Condition, RuleSet};

pub const RULES_FORMAT: &str = "reann-rules/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Op {
    /// `value <= threshold` (inclusive).
    Le,
    /// `value > threshold`.
    Gt,
    /// Categorical code equality.
    Eq,
}

impl Op {
    pub fn symbol(self) -> &'static str {
        match self {
            Op::Le => "<=",
            Op::Gt => ">",
            Op::Eq => "=",
        }
    }

    pub fn holds(self, x: f64, value: f64) -> bool {
        match self {
            Op::Le => x <= value,
            Op::Gt => x > value,
            Op::Eq => x == value,
        }
    }
}

/// One attribute/op/value triple. `value` is in original units (category
/// code for `Eq`); `display` is what the text rendering shows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolicCondition {
    pub attribute: usize,
    pub op: Op,
    pub value: f64,
    pub display: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolicRule {
    pub conditions: Vec<SymbolicCondition>,
    pub class: usize,
    /// Training coverage, used to settle conflicts.
    pub covered: usize,
    pub correct: usize,
}

impl SymbolicRule {
    pub fn covers(&self, raw: &[f64]) -> bool {
        self.conditions
            .iter()
            .all(|c| c.op.holds(raw[c.attribute], c.value))
    }

    /// Number of attributes tested (an interval counts once).
    pub fn condition_count(&self) -> usize {
        let mut attrs: Vec<usize> = self.conditions.iter().map(|c| c.attribute).collect();
        attrs.dedup();
        attrs.len()
    }
}

/// A finished rule set over original attributes, as written to rules files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolicRuleSet {
    pub format: String,
    pub dataset: String,
    pub attributes: Vec<String>,
    pub classes: Vec<String>,
    pub rules: Vec<SymbolicRule>,
    pub default_class: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RuleEvaluation {
    pub total: usize,
    pub correct: usize,
    pub accuracy: f64,
    /// Patterns covered by rules of two different classes.
    pub conflicts: usize,
    /// Patterns that fell through to the default rule.
    pub defaulted: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RuleMetrics {
    /// Rules excluding the default.
    pub rule_count: usize,
    /// Average conditions per non-default rule.
    pub avg_conditions: f64,
    pub accuracy_train: f64,
    pub accuracy_test: f64,
}

impl RuleMetrics {
    pub fn rules_with_default(&self) -> usize {
        self.rule_count + 1
    }
}

impl SymbolicRuleSet {
    pub fn condition_count(&self) -> usize {
        self.rules.iter().map(SymbolicRule::condition_count).sum()
    }

    pub fn avg_conditions(&self) -> f64 {
        if self.rules.is_empty() {
            0.0
        } else {
            self.condition_count() as f64 / self.rules.len() as f64
        }
    }

    /// Class for one raw pattern and whether covering rules disagreed.
    pub fn classify(&self, raw: &[f64]) -> (usize, bool, bool) {
        let mut fired: Option<&SymbolicRule> = None;
        let mut conflict = false;
        for r in self.rules.iter().filter(|r| r.covers(raw)) {
            match fired {
                None => fired = Some(r),
                Some(f) => {
                    conflict |= f.class != r.class;
                    if r.correct > f.correct {
                        fired = Some(r);
                    }
                }
            }
        }
        match fired {
            Some(r) => (r.class, conflict, false),
            None => (self.default_class, false, true),
        }
    }

    fn attribute_label(&self, a: usize) -> String {
        format!("{} (A{})", self.attributes[a], a + 1)
    }

    /// "If ... and ... then ..." block followed by the default rule.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        for (i, r) in self.rules.iter().enumerate() {
            let body = if r.conditions.is_empty() {
                "always".to_string()
            } else {
                r.conditions
                    .iter()
                    .map(|c| {
                        format!(
                            "{} {} {}",
                            self.attribute_label(c.attribute),
                            c.op.symbol(),
                            c.display
                        )
                    })
                    .collect::<Vec<_>>()
                    .join(" and ")
            };
            let _ = writeln!(
                out,
                "Rule {}: If {} then {}",
                i + 1,
                body,
                self.classes[r.class]
            );
        }
        let _ = writeln!(out, "Default Rule: {}", self.classes[self.default_class]);
        out
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let rs: SymbolicRuleSet =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if rs.format != RULES_FORMAT {
            return Err(Error::Format(format!(
                "expected format {RULES_FORMAT}, found {}",
                rs.format
            )));
        }
        if rs.default_class >= rs.classes.len() {
            return Err(Error::Format("default class out of range".into()));
        }
        for r in &rs.rules {
            if r.class >= rs.classes.len() {
                return Err(Error::Format("rule class out of range".into()));
            }
            if r.conditions
                .iter()
                .any(|c| c.attribute >= rs.attributes.len())
            {
                return Err(Error::Format("condition attribute out of range".into()));
            }
        }
        Ok(rs)
    }
}

/// Classifies every pattern of `ds` by its raw values.
pub fn evaluate_rules(rs: &SymbolicRuleSet, ds: &Dataset) -> Result<RuleEvaluation> {
    if ds.is_empty() {
        return Err(Error::NoPatterns);
    }
    if ds.attribute_count() != rs.attributes.len() {
        return Err(Error::Dimension {
            expected: rs.attributes.len(),
            actual: ds.attribute_count(),
        });
    }
    let mut ev = RuleEvaluation {
        total: ds.len(),
        ..RuleEvaluation::default()
    };
    for p in &ds.patterns {
        let (class, conflict, defaulted) = rs.classify(&p.raw);
        ev.correct += usize::from(class == p.class_index);
        ev.conflicts += usize::from(conflict);
        ev.defaulted += usize::from(defaulted);
    }
    ev.accuracy = ev.correct as f64 / ev.total as f64;
    Ok(ev)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LexiconAttribute {
    pub name: String,
    pub bins: AttributeBins,
    pub categories: Vec<String>,
    /// Map into normalized units, when thresholds are shown normalized.
    pub display_transform: Option<Transform>,
}

/// Everything needed to turn code-level rules into readable ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lexicon {
    pub dataset: String,
    pub attributes: Vec<LexiconAttribute>,
    pub classes: Vec<String>,
    pub precision: u32,
}

impl Lexicon {
    pub fn new(
        schema: &DatasetSchema,
        view: &DiscretizedView,
        map: Option<&NormalizationMap>,
    ) -> Self {
        let attributes = schema
            .attributes
            .iter()
            .zip(&view.attributes)
            .enumerate()
            .map(|(a, (spec, bins))| LexiconAttribute {
                name: spec.name.clone(),
                bins: bins.clone(),
                categories: if spec.kind == AttributeKind::Categorical {
                    spec.categories.clone()
                } else {
                    Vec::new()
                },
                display_transform: match (schema.threshold_units, map) {
                    (ThresholdUnits::Normalized, Some(m)) => Some(m.transforms[a]),
                    _ => None,
                },
            })
            .collect();
        let classes = if schema.class_names.is_empty() {
            schema.class_labels.clone()
        } else {
            schema.class_names.clone()
        };
        Lexicon {
            dataset: schema.name.clone(),
            attributes,
            classes,
            precision: schema.precision,
        }
    }

    fn show(&self, a: usize, raw: f64) -> String {
        let attr = &self.attributes[a];
        let v = attr.display_transform.map_or(raw, |t| t.apply(raw));
        format!("{:.*}", self.precision as usize, v)
    }

    fn threshold(&self, a: usize, op: Op, raw: f64) -> SymbolicCondition {
        SymbolicCondition {
            attribute: a,
            op,
            value: raw,
            display: self.show(a, raw),
        }
    }

    /// Triples for one code interval. Ordered attributes use the `below`
    /// value of the bounding cuts; a full-range interval yields nothing.
    pub fn conditions(&self, cond: &Condition) -> Vec<SymbolicCondition> {
        let a = cond.attribute;
        match &self.attributes[a].bins {
            AttributeBins::Ordered { cuts } => {
                let mut out = Vec::new();
                if cond.lo > 0 {
                    out.push(self.threshold(a, Op::Gt, cuts[cond.lo - 1].below));
                }
                if cond.hi < cuts.len() {
                    out.push(self.threshold(a, Op::Le, cuts[cond.hi].below));
                }
                out
            }
            AttributeBins::Categorical { levels } => {
                let name = |k: usize| {
                    self.attributes[a]
                        .categories
                        .get(k)
                        .cloned()
                        .unwrap_or_else(|| k.to_string())
                };
                if cond.lo == cond.hi {
                    vec![SymbolicCondition {
                        attribute: a,
                        op: Op::Eq,
                        value: cond.lo as f64,
                        display: name(cond.lo),
                    }]
                } else {
                    // code ranges on unordered attributes compare the codes
                    let mut out = Vec::new();
                    if cond.lo > 0 {
                        out.push(SymbolicCondition {
                            attribute: a,
                            op: Op::Gt,
                            value: (cond.lo - 1) as f64,
                            display: name(cond.lo - 1),
                        });
                    }
                    if cond.hi + 1 < *levels {
                        out.push(SymbolicCondition {
                            attribute: a,
                            op: Op::Le,
                            value: cond.hi as f64,
                            display: name(cond.hi),
                        });
                    }
                    out
                }
            }
        }
    }

    /// Renders an input-level rule set. Requires a default class.
    pub fn symbolic(&self, rs: &RuleSet) -> Result<SymbolicRuleSet> {
        let default_class = rs
            .default_class
            .ok_or_else(|| Error::Extraction("rule set has no default class".into()))?;
        let rules = rs
            .rules
            .iter()
            .map(|r| SymbolicRule {
                conditions: r
                    .conditions
                    .iter()
                    .flat_map(|c| self.conditions(c))
                    .collect(),
                class: r.class,
                covered: r.stats.covered,
                correct: r.stats.correct,
            })
            .collect();
        Ok(SymbolicRuleSet {
            format: RULES_FORMAT.to_string(),
            dataset: self.dataset.clone(),
            attributes: self.attributes.iter().map(|a| a.name.clone()).collect(),
            classes: self.classes.clone(),
            rules,
            default_class,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Cut;
    use crate::rex::Rule;

    fn lexicon() -> Lexicon {
        Lexicon {
            dataset: "t".into(),
            attributes: vec![LexiconAttribute {
                name: "Petal-length".into(),
                bins: AttributeBins::Ordered {
                    cuts: vec![
                        Cut {
                            edge: 2.45,
                            below: 1.9,
                            above: 3.0,
                        },
                        Cut {
                            edge: 4.95,
                            below: 4.9,
                            above: 5.0,
                        },
                    ],
                },
                categories: vec![],
                display_transform: None,
            }],
            classes: vec!["setosa".into(), "versicolor".into(), "virginica".into()],
            precision: 1,
        }
    }

    #[test]
    fn thresholds_render_inclusive() {
        let lex = lexicon();
        let rs = RuleSet {
            rules: vec![
                Rule::new(vec![Condition::equals(0, 0)], 0),
                Rule::new(vec![Condition::equals(0, 1)], 1),
            ],
            default_class: Some(2),
        };
        let s = lex.symbolic(&rs).unwrap();
        let text = s.render_text();
        assert!(
            text.contains("Rule 1: If Petal-length (A1) <= 1.9 then setosa"),
            "{text}"
        );
        assert!(
            text.contains("Petal-length (A1) > 1.9 and Petal-length (A1) <= 4.9 then versicolor")
        );
        assert!(text.ends_with("Default Rule: virginica\n"));
        // <= is inclusive on the boundary value
        assert_eq!(s.classify(&[1.9]).0, 0);
        assert_eq!(s.classify(&[2.0]).0, 1);
        assert_eq!(s.classify(&[6.0]), (2, false, true));
        assert_eq!(s.rules[1].condition_count(), 1);
    }

    #[test]
    fn json_round_trip() {
        let lex = lexicon();
        let rs = RuleSet {
            rules: vec![Rule::new(
                vec![Condition {
                    attribute: 0,
                    lo: 0,
                    hi: 1,
                }],
                0,
            )],
            default_class: Some(1),
        };
        let s = lex.symbolic(&rs).unwrap();
        let back = SymbolicRuleSet::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn wrong_format_rejected() {
        let text = r#"{"format":"x","dataset":"d","attributes":[],"classes":["a"],"rules":[],"default_class":0}"#;
        assert!(SymbolicRuleSet::from_json(text).is_err());
    }
}
