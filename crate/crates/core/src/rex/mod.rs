//! REx: rule extraction over discrete tables.
//!
//! A [`DiscreteTable`] holds coded patterns (bin, category or cluster codes)
//! with class labels. [`extract_rules`] runs sequential covering,
//! [`cluster_rules`] groups the draft by class, [`prune_rules`] generalizes and
//! removes redundant and noise rules, and [`default_rule`] picks the class
//! assigned to uncovered patterns. [`merge_layers`] substitutes hidden-node
//! conditions by their input-level rules to obtain rules over the inputs, and
//! [`simplify`] runs the accuracy-gated generalization rounds.
//!
//! Rules are conjunctions with at most one condition per attribute. On the
//! table they were built from, no two rules of different classes cover the
//! same pattern, so classification does not depend on rule order.

mod extract;
mod merge;
mod prune;
mod symbolic;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use extract::extract_rules;
pub use merge::{merge_layers, InputRules, MAX_MERGED_RULES};
pub use prune::{cluster_rules, default_rule, prune_rules, simplify, RuleLoopSpec, SimplifyRound};
pub use symbolic::{
    evaluate_rules, Lexicon, LexiconAttribute, Op, RuleEvaluation, RuleMetrics, SymbolicCondition,
    SymbolicRule, SymbolicRuleSet, RULES_FORMAT,
};

/// `lo <= code <= hi` on one attribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Condition {
    pub attribute: usize,
    pub lo: usize,
    pub hi: usize,
}

impl Condition {
    pub fn equals(attribute: usize, code: usize) -> Self {
        Condition {
            attribute,
            lo: code,
            hi: code,
        }
    }

    pub fn holds(&self, codes: &[usize]) -> bool {
        let c = codes[self.attribute];
        self.lo <= c && c <= self.hi
    }

    /// True when every code accepted by `other` is accepted by `self`.
    pub fn contains(&self, other: &Condition) -> bool {
        self.attribute == other.attribute && self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn intersect(&self, other: &Condition) -> Option<Condition> {
        debug_assert_eq!(self.attribute, other.attribute);
        let lo = self.lo.max(other.lo);
        let hi = self.hi.min(other.hi);
        (lo <= hi).then_some(Condition {
            attribute: self.attribute,
            lo,
            hi,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RuleStats {
    pub covered: usize,
    pub correct: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rule {
    /// Sorted by attribute, one per attribute. Empty means "always".
    pub conditions: Vec<Condition>,
    pub class: usize,
    #[serde(default)]
    pub stats: RuleStats,
}

impl Rule {
    pub fn new(mut conditions: Vec<Condition>, class: usize) -> Self {
        conditions.sort();
        Rule {
            conditions,
            class,
            stats: RuleStats::default(),
        }
    }

    pub fn covers(&self, codes: &[usize]) -> bool {
        self.conditions.iter().all(|c| c.holds(codes))
    }

    /// `self` is at least as general as `other`: every condition of `self`
    /// contains `other`'s condition on the same attribute.
    pub fn generalizes(&self, other: &Rule) -> bool {
        self.conditions.iter().all(|c| {
            other
                .conditions
                .iter()
                .any(|o| o.attribute == c.attribute && c.contains(o))
        })
    }

    pub fn same_body(&self, other: &Rule) -> bool {
        self.class == other.class && self.conditions == other.conditions
    }
}

pub fn rule_covers(rule: &Rule, codes: &[usize]) -> bool {
    rule.covers(codes)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleSet {
    pub rules: Vec<Rule>,
    /// `None` for drafts that have not been through [`default_rule`].
    pub default_class: Option<usize>,
}

/// How a rule set classified one pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Covered(usize),
    Default(usize),
    /// Rules of different classes fired; the class of the covering rule with
    /// the most correct coverage is used.
    Conflict(usize),
    Uncovered,
}

impl Verdict {
    pub fn class(self) -> Option<usize> {
        match self {
            Verdict::Covered(c) | Verdict::Default(c) | Verdict::Conflict(c) => Some(c),
            Verdict::Uncovered => None,
        }
    }
}

impl RuleSet {
    pub fn new(rules: Vec<Rule>) -> Self {
        RuleSet {
            rules,
            default_class: None,
        }
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn condition_count(&self) -> usize {
        self.rules.iter().map(|r| r.conditions.len()).sum()
    }

    pub fn verdict(&self, codes: &[usize]) -> Verdict {
        let mut fired: Option<&Rule> = None;
        let mut conflict = false;
        for r in self.rules.iter().filter(|r| r.covers(codes)) {
            match fired {
                None => fired = Some(r),
                Some(f) => {
                    if f.class != r.class {
                        conflict = true;
                    }
                    if r.stats.correct > f.stats.correct {
                        fired = Some(r);
                    }
                }
            }
        }
        match (fired, conflict) {
            (Some(r), false) => Verdict::Covered(r.class),
            (Some(r), true) => Verdict::Conflict(r.class),
            (None, _) => match self.default_class {
                Some(d) => Verdict::Default(d),
                None => Verdict::Uncovered,
            },
        }
    }

    pub fn classify(&self, codes: &[usize]) -> Option<usize> {
        self.verdict(codes).class()
    }

    /// Fraction of table rows classified correctly (uncovered rows count as wrong).
    pub fn accuracy(&self, table: &DiscreteTable) -> f64 {
        if table.is_empty() {
            return 0.0;
        }
        let correct = table
            .rows
            .iter()
            .zip(&table.classes)
            .filter(|(codes, &c)| self.classify(codes) == Some(c))
            .count();
        correct as f64 / table.len() as f64
    }

    /// Rows covered by two rules of different classes.
    pub fn conflicts(&self, table: &DiscreteTable) -> usize {
        table
            .rows
            .iter()
            .filter(|codes| matches!(self.verdict(codes), Verdict::Conflict(_)))
            .count()
    }

    /// Recomputes every rule's coverage statistics against `table`.
    pub fn with_stats(mut self, table: &DiscreteTable) -> Self {
        for r in &mut self.rules {
            r.stats = table.stats(r);
        }
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributeInfo {
    /// Number of codes, `0..arity`.
    pub arity: usize,
    /// Ordered codes may form intervals; unordered ones only single codes.
    pub ordered: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiscreteTable {
    pub attributes: Vec<AttributeInfo>,
    pub rows: Vec<Vec<usize>>,
    pub classes: Vec<usize>,
    pub class_count: usize,
}

impl DiscreteTable {
    pub fn new(
        attributes: Vec<AttributeInfo>,
        rows: Vec<Vec<usize>>,
        classes: Vec<usize>,
        class_count: usize,
    ) -> Self {
        assert_eq!(rows.len(), classes.len(), "one class per row");
        DiscreteTable {
            attributes,
            rows,
            classes,
            class_count,
        }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn attribute_count(&self) -> usize {
        self.attributes.len()
    }

    /// Majority class of each row's code vector; ties go to the lowest class.
    pub fn majority_labels(&self) -> Vec<usize> {
        let mut groups: BTreeMap<&[usize], Vec<usize>> = BTreeMap::new();
        for (codes, &c) in self.rows.iter().zip(&self.classes) {
            groups
                .entry(codes.as_slice())
                .or_insert_with(|| vec![0; self.class_count])[c] += 1;
        }
        self.rows
            .iter()
            .map(|codes| {
                let hist = &groups[codes.as_slice()];
                let mut best = 0;
                for (k, &n) in hist.iter().enumerate() {
                    if n > hist[best] {
                        best = k;
                    }
                }
                best
            })
            .collect()
    }

    pub fn inconsistency_rate(&self) -> f64 {
        crate::dataset::inconsistency_rate(&self.rows, &self.classes)
    }

    pub fn stats(&self, rule: &Rule) -> RuleStats {
        let mut s = RuleStats::default();
        for (codes, &c) in self.rows.iter().zip(&self.classes) {
            if rule.covers(codes) {
                s.covered += 1;
                if c == rule.class {
                    s.correct += 1;
                }
            }
        }
        s
    }

    /// Class histogram over all rows.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_count];
        for &c in &self.classes {
            counts[c] += 1;
        }
        counts
    }

    /// Projection onto a subset of attributes, in the given order.
    pub fn project(&self, attributes: &[usize]) -> DiscreteTable {
        DiscreteTable {
            attributes: attributes.iter().map(|&a| self.attributes[a]).collect(),
            rows: self
                .rows
                .iter()
                .map(|r| attributes.iter().map(|&a| r[a]).collect())
                .collect(),
            classes: self.classes.clone(),
            class_count: self.class_count,
        }
    }

    /// Same rows with different labels.
    pub fn relabel(&self, classes: Vec<usize>, class_count: usize) -> DiscreteTable {
        DiscreteTable::new(
            self.attributes.clone(),
            self.rows.clone(),
            classes,
            class_count,
        )
    }
}

/// Index of the most frequent entry; lowest index on ties. `None` when all zero.
pub(crate) fn argmax_count(counts: &[usize]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, &n) in counts.iter().enumerate() {
        if n > 0 && best.is_none_or(|b| n > counts[b]) {
            best = Some(k);
        }
    }
    best
}
