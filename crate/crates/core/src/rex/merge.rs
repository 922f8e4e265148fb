use crate::error::{Error, Result};

use super::{Condition, Rule, RuleSet};

/// Upper bound on the number of conjunctions one expansion may produce.
pub const MAX_MERGED_RULES: usize = 50_000;

/// Input-level rules for every code of every hidden attribute.
///
/// `per_code[h][k]` lists rules over input attributes that conclude hidden
/// attribute `h` takes code `k`. Their condition attributes are input indices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct InputRules {
    pub per_code: Vec<Vec<Vec<Rule>>>,
}

/// Conjunction of two condition lists; `None` when some attribute is empty.
fn conjoin(a: &[Condition], b: &[Condition]) -> Option<Vec<Condition>> {
    let mut out: Vec<Condition> = a.to_vec();
    for c in b {
        match out.iter_mut().find(|o| o.attribute == c.attribute) {
            Some(o) => *o = o.intersect(c)?,
            None => out.push(*c),
        }
    }
    out.sort();
    Some(out)
}

/// Rewrites hidden-level rules as rules over the inputs.
///
/// A hidden condition `lo <= h <= hi` becomes the disjunction of the input
/// rules of codes `lo..=hi`; a hidden rule becomes the product of its
/// conditions' disjunctions, expanded into separate conjunctive rules.
/// Contradictory conjunctions are dropped and duplicates removed.
pub fn merge_layers(hidden: &RuleSet, inputs: &InputRules) -> Result<RuleSet> {
    let mut merged: Vec<Rule> = Vec::new();
    for (ri, rule) in hidden.rules.iter().enumerate() {
        let mut terms: Vec<Vec<Condition>> = vec![Vec::new()];
        for cond in &rule.conditions {
            let codes = inputs.per_code.get(cond.attribute).ok_or_else(|| {
                Error::Extraction(format!(
                    "rule {} references hidden attribute {} with no input rules",
                    ri + 1,
                    cond.attribute
                ))
            })?;
            let mut alternatives: Vec<&Rule> = Vec::new();
            for code in cond.lo..=cond.hi {
                match codes.get(code) {
                    Some(rs) => alternatives.extend(rs.iter()),
                    None => {
                        return Err(Error::Extraction(format!(
                            "hidden attribute {} has no code {}",
                            cond.attribute, code
                        )))
                    }
                }
            }
            if alternatives.is_empty() {
                return Err(Error::Extraction(format!(
                    "no input rules for code(s) {}..={} of hidden attribute {}",
                    cond.lo, cond.hi, cond.attribute
                )));
            }
            if terms.len().saturating_mul(alternatives.len()) > MAX_MERGED_RULES {
                return Err(Error::Extraction(format!(
                    "merging rule {} would exceed {} conjunctions",
                    ri + 1,
                    MAX_MERGED_RULES
                )));
            }
            let mut next = Vec::with_capacity(terms.len() * alternatives.len());
            for t in &terms {
                for alt in &alternatives {
                    if let Some(c) = conjoin(t, &alt.conditions) {
                        if !next.contains(&c) {
                            next.push(c);
                        }
                    }
                }
            }
            terms = next;
        }
        for t in terms {
            let r = Rule::new(t, rule.class);
            if !merged.iter().any(|m| m.same_body(&r)) {
                merged.push(r);
            }
        }
    }
    Ok(RuleSet {
        rules: merged,
        default_class: hidden.default_class,
    })
}
