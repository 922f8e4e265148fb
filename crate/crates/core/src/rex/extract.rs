use super::{Condition, DiscreteTable, Rule, RuleSet};

/// Sequential covering over the table.
///
/// Each row is first relabeled with the majority class of its code vector, so
/// identical vectors never need rules of different classes. The first
/// uncovered row seeds a rule that fixes every attribute to the row's code.
/// Conditions are then dropped, least discriminating first, while the rule
/// still covers no row of another (majority) class. Every row the final rule
/// covers is marked. Ties in discriminating power go to the lower attribute.
pub fn extract_rules(table: &DiscreteTable) -> RuleSet {
    let labels = table.majority_labels();
    let mut marked = vec![false; table.len()];
    let mut rules = Vec::new();

    while let Some(seed) = marked.iter().position(|m| !m) {
        let class = labels[seed];
        let codes = &table.rows[seed];

        // power = other-class rows that this condition alone excludes
        let mut order: Vec<(usize, usize)> = (0..table.attribute_count())
            .map(|a| {
                let power = table
                    .rows
                    .iter()
                    .zip(&labels)
                    .filter(|(r, &l)| l != class && r[a] != codes[a])
                    .count();
                (power, a)
            })
            .collect();
        order.sort_unstable();

        let mut kept: Vec<Condition> = (0..table.attribute_count())
            .map(|a| Condition::equals(a, codes[a]))
            .collect();
        for &(_, a) in &order {
            let trial: Vec<Condition> = kept.iter().copied().filter(|c| c.attribute != a).collect();
            let consistent = !table
                .rows
                .iter()
                .zip(&labels)
                .any(|(r, &l)| l != class && trial.iter().all(|c| c.holds(r)));
            if consistent {
                kept = trial;
            }
        }

        let rule = Rule::new(kept, class);
        for (m, r) in marked.iter_mut().zip(&table.rows) {
            if rule.covers(r) {
                *m = true;
            }
        }
        rules.push(rule);
    }

    RuleSet::new(rules).with_stats(table)
}
