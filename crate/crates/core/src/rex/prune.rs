use serde::{Deserialize, Serialize};

use super::{argmax_count, Condition, DiscreteTable, Rule, RuleSet};

/// Groups rules by class (stable within a class) and drops exact duplicates.
pub fn cluster_rules(rs: &RuleSet) -> RuleSet {
    let mut rules: Vec<Rule> = Vec::with_capacity(rs.rules.len());
    let mut sorted = rs.rules.clone();
    sorted.sort_by_key(|r| r.class);
    for r in sorted {
        if !rules.iter().any(|k| k.same_body(&r)) {
            rules.push(r);
        }
    }
    RuleSet {
        rules,
        default_class: rs.default_class,
    }
}

fn misclassified(table: &DiscreteTable, rule: &Rule) -> usize {
    let s = table.stats(rule);
    s.covered - s.correct
}

/// Other-class rows excluded by `cond` on its own.
fn exclusion_power(table: &DiscreteTable, class: usize, cond: &Condition) -> usize {
    table
        .rows
        .iter()
        .zip(&table.classes)
        .filter(|(r, &c)| c != class && !cond.holds(r))
        .count()
}

/// Drops or widens conditions while the rule's misclassification count on
/// `table` does not grow. Conditions are tried least discriminating first.
fn generalize(table: &DiscreteTable, rule: &Rule) -> Rule {
    let mut current = rule.clone();
    let mut mis = misclassified(table, &current);
    let mut order: Vec<(usize, Condition)> = rule
        .conditions
        .iter()
        .map(|c| (exclusion_power(table, rule.class, c), *c))
        .collect();
    order.sort_by_key(|&(p, c)| (p, c.attribute));

    for (_, cond) in order {
        let Some(pos) = current
            .conditions
            .iter()
            .position(|c| c.attribute == cond.attribute)
        else {
            continue;
        };
        let mut trials: Vec<Rule> = Vec::new();
        let mut dropped = current.clone();
        dropped.conditions.remove(pos);
        trials.push(dropped);
        let info = table.attributes[cond.attribute];
        let c = current.conditions[pos];
        if info.ordered {
            let top = info.arity.saturating_sub(1);
            if c.lo > 0 && c.hi < top {
                let mut lower = current.clone();
                lower.conditions[pos].lo = 0;
                trials.push(lower);
                let mut upper = current.clone();
                upper.conditions[pos].hi = top;
                trials.push(upper);
            }
        }
        for t in trials {
            let m = misclassified(table, &t);
            if m <= mis {
                mis = m;
                current = t;
                break;
            }
        }
    }
    current
}

/// Pruning against a reference table.
///
/// 1. generalize each rule (drop or widen conditions without adding errors);
/// 2. drop rules subsumed by a more general rule of the same class;
/// 3. drop rules whose covered rows are all covered by other same-class rules;
/// 4. drop rules that classify fewer than `noise_floor` rows correctly.
pub fn prune_rules(rs: &RuleSet, table: &DiscreteTable, noise_floor: usize) -> RuleSet {
    let generalized: Vec<Rule> = rs.rules.iter().map(|r| generalize(table, r)).collect();

    let mut kept: Vec<Rule> = Vec::new();
    for (i, r) in generalized.iter().enumerate() {
        let subsumed = generalized.iter().enumerate().any(|(j, o)| {
            j != i && o.class == r.class && o.generalizes(r) && (!r.generalizes(o) || j < i)
        });
        if !subsumed {
            kept.push(r.clone());
        }
    }
    let mut rules = RuleSet {
        rules: kept,
        default_class: rs.default_class,
    }
    .with_stats(table)
    .rules;

    let cover: Vec<Vec<bool>> = rules
        .iter()
        .map(|r| table.rows.iter().map(|row| r.covers(row)).collect())
        .collect();
    let mut alive = vec![true; rules.len()];
    let mut order: Vec<usize> = (0..rules.len()).collect();
    order.sort_by_key(|&i| (rules[i].stats.correct, std::cmp::Reverse(i)));
    for i in order {
        let redundant = (0..table.len()).filter(|&row| cover[i][row]).all(|row| {
            (0..rules.len())
                .any(|j| j != i && alive[j] && rules[j].class == rules[i].class && cover[j][row])
        });
        if redundant {
            alive[i] = false;
        }
    }
    let mut idx = 0;
    rules.retain(|r| {
        let keep = alive[idx] && r.stats.correct >= noise_floor;
        idx += 1;
        keep
    });

    RuleSet {
        rules,
        default_class: rs.default_class,
    }
}

/// Predictions of `rules` (restricted to `active`) given precomputed coverage,
/// following [`RuleSet::verdict`]: the covering rule with the most correct
/// coverage wins, earliest on ties.
fn predict_all(
    rules: &[Rule],
    cover: &[Vec<bool>],
    active: &[bool],
    default: Option<usize>,
    rows: usize,
) -> Vec<Option<usize>> {
    (0..rows)
        .map(|row| {
            let mut fired: Option<usize> = None;
            for i in 0..rules.len() {
                if active[i] && cover[i][row] {
                    match fired {
                        Some(f) if rules[i].stats.correct <= rules[f].stats.correct => {}
                        _ => fired = Some(i),
                    }
                }
            }
            fired.map(|i| rules[i].class).or(default)
        })
        .collect()
}

fn count_correct(pred: &[Option<usize>], classes: &[usize]) -> usize {
    pred.iter()
        .zip(classes)
        .filter(|(p, &c)| **p == Some(c))
        .count()
}

/// Chooses the default class and drops the rules it makes unnecessary.
///
/// Every class is tried as the default: its own rules are removed (last
/// first) whenever that does not lower training accuracy. The candidate with
/// the highest accuracy wins, then the fewest rules, then the fewest
/// conditions, then the majority class of the patterns left uncovered by the
/// incoming rules, then the overall majority class, then the lowest index.
pub fn default_rule(rs: &RuleSet, table: &DiscreteTable) -> RuleSet {
    let rs = rs.clone().with_stats(table);
    let n = table.len();
    let cover: Vec<Vec<bool>> = rs
        .rules
        .iter()
        .map(|r| table.rows.iter().map(|row| r.covers(row)).collect())
        .collect();

    let mut uncovered = vec![0usize; table.class_count];
    for row in 0..n {
        if !cover.iter().any(|c| c[row]) {
            uncovered[table.classes[row]] += 1;
        }
    }
    let uncovered_major = argmax_count(&uncovered);
    let overall_major = argmax_count(&table.class_counts());

    type Key = (std::cmp::Reverse<usize>, usize, usize, bool, bool, usize);
    let mut best: Option<(Key, Vec<bool>)> = None;
    for c in 0..table.class_count {
        let mut active = vec![true; rs.rules.len()];
        let mut correct = count_correct(
            &predict_all(&rs.rules, &cover, &active, Some(c), n),
            &table.classes,
        );
        for i in (0..rs.rules.len()).rev() {
            if rs.rules[i].class != c {
                continue;
            }
            active[i] = false;
            let trial = count_correct(
                &predict_all(&rs.rules, &cover, &active, Some(c), n),
                &table.classes,
            );
            if trial >= correct {
                correct = trial;
            } else {
                active[i] = true;
            }
        }
        let rule_count = active.iter().filter(|a| **a).count();
        let conds: usize = rs
            .rules
            .iter()
            .zip(&active)
            .filter(|(_, a)| **a)
            .map(|(r, _)| r.conditions.len())
            .sum();
        let key: Key = (
            std::cmp::Reverse(correct),
            rule_count,
            conds,
            uncovered_major != Some(c),
            overall_major != Some(c),
            c,
        );
        if best.as_ref().is_none_or(|(k, _)| key < *k) {
            best = Some((key, active));
        }
    }

    let Some((key, active)) = best else {
        return rs;
    };
    let rules = rs
        .rules
        .into_iter()
        .zip(active)
        .filter_map(|(r, a)| a.then_some(r))
        .collect();
    RuleSet {
        rules,
        default_class: Some(key.5),
    }
    .with_stats(table)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RuleLoopSpec {
    /// A round may lower training accuracy by at most this much.
    pub round_tolerance: f64,
    /// Absolute training accuracy the rule set must keep.
    pub floor: f64,
    pub max_rounds: usize,
}

impl Default for RuleLoopSpec {
    fn default() -> Self {
        RuleLoopSpec {
            round_tolerance: 0.01,
            floor: 0.0,
            max_rounds: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplifyRound {
    pub round: usize,
    pub action: String,
    pub accuracy: f64,
    pub rules: usize,
    pub conditions: usize,
}

enum Move {
    DropRule(usize),
    DropCondition(usize, usize),
    Widen(usize, usize, bool),
}

impl Move {
    fn apply(&self, rs: &RuleSet, table: &DiscreteTable) -> RuleSet {
        let mut out = rs.clone();
        match *self {
            Move::DropRule(i) => {
                out.rules.remove(i);
            }
            Move::DropCondition(i, j) => {
                out.rules[i].conditions.remove(j);
            }
            Move::Widen(i, j, down) => {
                let c = &mut out.rules[i].conditions[j];
                if down {
                    c.lo = 0;
                } else {
                    c.hi = table.attributes[c.attribute].arity - 1;
                }
            }
        }
        out
    }

    fn describe(&self) -> String {
        match *self {
            Move::DropRule(i) => format!("drop rule {}", i + 1),
            Move::DropCondition(i, j) => format!("drop condition {} of rule {}", j + 1, i + 1),
            Move::Widen(i, j, down) => format!(
                "widen condition {} of rule {} {}",
                j + 1,
                i + 1,
                if down { "downward" } else { "upward" }
            ),
        }
    }
}

/// Greedy simplification rounds on a finished rule set.
///
/// Each round evaluates removing one rule, removing one condition, or turning
/// a two-sided interval one-sided, re-choosing the default each time. The
/// most accurate candidate (then the simplest) is applied when it keeps
/// accuracy within `round_tolerance` (or one pattern, whichever is larger)
/// of the round start and above `floor`,
/// does not add conflicts, and is simpler or strictly more accurate.
pub fn simplify(
    rs: &RuleSet,
    table: &DiscreteTable,
    spec: &RuleLoopSpec,
) -> (RuleSet, Vec<SimplifyRound>) {
    let mut current = default_rule(rs, table);
    let mut log = Vec::new();
    let tolerance = spec.round_tolerance.max(1.0 / table.len().max(1) as f64);
    for round in 1..=spec.max_rounds {
        let acc = current.accuracy(table);
        let conflicts = current.conflicts(table);
        let size = (current.len(), current.condition_count());

        let mut moves = Vec::new();
        for (i, r) in current.rules.iter().enumerate() {
            moves.push(Move::DropRule(i));
            for (j, c) in r.conditions.iter().enumerate() {
                moves.push(Move::DropCondition(i, j));
                let info = table.attributes[c.attribute];
                if info.ordered && c.lo > 0 && c.hi + 1 < info.arity {
                    moves.push(Move::Widen(i, j, true));
                    moves.push(Move::Widen(i, j, false));
                }
            }
        }

        let mut best: Option<(f64, (usize, usize), RuleSet, &Move)> = None;
        for m in &moves {
            let cand = default_rule(&m.apply(&current, table), table);
            let a = cand.accuracy(table);
            let s = (cand.len(), cand.condition_count());
            let improves = s < size || a > acc + 1e-12;
            if !improves
                || a + 1e-12 < acc - tolerance
                || a + 1e-12 < spec.floor
                || cand.conflicts(table) > conflicts
            {
                continue;
            }
            let better = match &best {
                None => true,
                Some((ba, bs, _, _)) => a > ba + 1e-12 || ((a - ba).abs() <= 1e-12 && s < *bs),
            };
            if better {
                best = Some((a, s, cand, m));
            }
        }

        let Some((a, _, cand, m)) = best else { break };
        let tidied = default_rule(&cluster_rules(&prune_rules(&cand, table, 0)), table);
        current = if tidied.accuracy(table) + 1e-12 >= a {
            tidied
        } else {
            cand
        };
        log.push(SimplifyRound {
            round,
            action: m.describe(),
            accuracy: current.accuracy(table),
            rules: current.len(),
            conditions: current.condition_count(),
        });
    }
    (current, log)
}

#[cfg(test)]
mod tests {
    use super::super::{extract_rules, AttributeInfo};
    use super::*;

    fn bool_table(f: impl Fn(usize, usize) -> usize) -> DiscreteTable {
        let rows: Vec<Vec<usize>> = (0..4).map(|i| vec![i & 1, i >> 1]).collect();
        let classes = rows.iter().map(|r| f(r[0], r[1])).collect();
        DiscreteTable::new(
            vec![
                AttributeInfo {
                    arity: 2,
                    ordered: false
                };
                2
            ],
            rows,
            classes,
            2,
        )
    }

    fn rex(t: &DiscreteTable) -> RuleSet {
        let draft = cluster_rules(&extract_rules(t));
        default_rule(&prune_rules(&draft, t, 0), t)
    }

    #[test]
    fn duplicates_collapse() {
        let r = Rule::new(vec![Condition::equals(0, 1)], 1);
        let rs = RuleSet::new(vec![r.clone(), Rule::new(vec![], 0), r]);
        let c = cluster_rules(&rs);
        assert_eq!(c.rules.len(), 2);
        assert_eq!(c.rules[0].class, 0);
    }

    #[test]
    fn subsumed_rule_is_dropped() {
        let t = bool_table(|a, _| a);
        let rs = RuleSet::new(vec![
            Rule::new(vec![Condition::equals(0, 1), Condition::equals(1, 1)], 1),
            Rule::new(vec![Condition::equals(0, 1)], 1),
        ]);
        let p = prune_rules(&rs, &t, 0);
        assert_eq!(p.rules.len(), 1);
        assert_eq!(p.rules[0].conditions, vec![Condition::equals(0, 1)]);
    }

    #[test]
    fn noise_rule_is_dropped() {
        let mut rows = vec![vec![0usize]; 349];
        rows.push(vec![1]);
        let classes = vec![0; 350];
        let t = DiscreteTable::new(
            vec![AttributeInfo {
                arity: 2,
                ordered: false,
            }],
            rows,
            classes,
            2,
        );
        let rs = RuleSet::new(vec![
            Rule::new(vec![Condition::equals(0, 0)], 0),
            Rule::new(vec![Condition::equals(0, 1)], 1),
        ]);
        let p = prune_rules(&rs, &t, 2);
        assert!(p.rules.iter().all(|r| r.class == 0));
    }

    /// Minimum total conditions of an order-free rule set that classifies the
    /// whole truth table, optionally with a default class. Brute force over
    /// all sets of terms on two boolean inputs.
    fn minimal_conditions(f: impl Fn(usize, usize) -> usize, with_default: bool) -> usize {
        let terms: Vec<Vec<Condition>> = {
            let mut v = vec![vec![]];
            for a in 0..2 {
                v.push(vec![Condition::equals(a, 0)]);
                v.push(vec![Condition::equals(a, 1)]);
            }
            for x in 0..2 {
                for y in 0..2 {
                    v.push(vec![Condition::equals(0, x), Condition::equals(1, y)]);
                }
            }
            v
        };
        let mut best = usize::MAX;
        for mask in 0u32..(1 << (terms.len() * 2)) {
            let mut rules = Vec::new();
            for (k, t) in terms.iter().enumerate() {
                for class in 0..2 {
                    if mask & (1 << (2 * k + class)) != 0 {
                        rules.push(Rule::new(t.clone(), class));
                    }
                }
            }
            let defaults: &[Option<usize>] = if with_default {
                &[Some(0), Some(1)]
            } else {
                &[None]
            };
            for &d in defaults {
                let ok = (0..4).all(|i| {
                    let row = [i & 1, i >> 1];
                    let fired: Vec<usize> = rules
                        .iter()
                        .filter(|r| r.covers(&row))
                        .map(|r| r.class)
                        .collect();
                    let want = f(row[0], row[1]);
                    if fired.is_empty() {
                        d == Some(want)
                    } else {
                        fired.iter().all(|&c| c == want)
                    }
                });
                if ok {
                    best = best.min(rules.iter().map(|r| r.conditions.len()).sum());
                }
            }
        }
        best
    }

    #[test]
    fn and_or_xor_match_brute_force_size() {
        // (function, minimum without default, minimum with default)
        type Case = (fn(usize, usize) -> usize, usize, usize);
        let cases: [Case; 3] = [
            (|a, b| a & b, 4, 2),
            (|a, b| a | b, 4, 2),
            (|a, b| a ^ b, 8, 4),
        ];
        for (f, bare, with_default) in cases {
            let t = bool_table(f);
            assert_eq!(minimal_conditions(f, false), bare);
            assert_eq!(minimal_conditions(f, true), with_default);
            let draft = extract_rules(&t);
            assert_eq!(draft.condition_count(), bare, "{draft:?}");
            let rs = rex(&t);
            assert_eq!(rs.accuracy(&t), 1.0);
            assert_eq!(rs.condition_count(), with_default, "{rs:?}");
        }
    }

    #[test]
    fn default_prefers_accuracy_then_size() {
        // class 1 only at (1,1): keeping the single class-1 rule is smallest
        let t = bool_table(|a, b| a & b);
        let rs = rex(&t);
        assert_eq!(rs.default_class, Some(0));
        assert_eq!(rs.rules.len(), 1);
        assert_eq!(rs.rules[0].class, 1);
    }

    #[test]
    fn simplify_respects_floor() {
        let t = bool_table(|a, b| a ^ b);
        let rs = rex(&t);
        let spec = RuleLoopSpec {
            floor: 1.0,
            ..RuleLoopSpec::default()
        };
        let (out, _) = simplify(&rs, &t, &spec);
        assert_eq!(out.accuracy(&t), 1.0);
    }
}
