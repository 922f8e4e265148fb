//! REx on small discrete tables: covering, pruning, then the default rule.
//!
//! cargo run --example rex_boolean

use reann::rex::{
    cluster_rules, default_rule, extract_rules, prune_rules, AttributeInfo, DiscreteTable, RuleSet,
};

fn table(f: impl Fn(usize, usize) -> usize) -> DiscreteTable {
    // a third attribute that never matters
    let rows: Vec<Vec<usize>> = (0..8).map(|i| vec![i & 1, (i >> 1) & 1, i >> 2]).collect();
    let classes = rows.iter().map(|r| f(r[0], r[1])).collect();
    let attr = AttributeInfo {
        arity: 2,
        ordered: false,
    };
    DiscreteTable::new(vec![attr; 3], rows, classes, 2)
}

fn show(name: &str, rs: &RuleSet) {
    println!(
        "{name}: {} rules, {} conditions",
        rs.len(),
        rs.condition_count()
    );
    for r in &rs.rules {
        let body: Vec<String> = r
            .conditions
            .iter()
            .map(|c| format!("x{} in {}..={}", c.attribute, c.lo, c.hi))
            .collect();
        let body = if body.is_empty() {
            "always".into()
        } else {
            body.join(" and ")
        };
        println!("  if {body} then {}", r.class);
    }
    if let Some(d) = rs.default_class {
        println!("  otherwise {d}");
    }
}

fn main() {
    for (name, f) in [
        ("and", (|a, b| a & b) as fn(usize, usize) -> usize),
        ("or", |a, b| a | b),
        ("xor", |a, b| a ^ b),
    ] {
        let t = table(f);
        let raw = extract_rules(&t);
        show(&format!("{name} covering"), &raw);
        let pruned = prune_rules(&cluster_rules(&raw), &t, 0);
        let with_default = default_rule(&pruned, &t);
        show(&format!("{name} with default"), &with_default);
        println!("  accuracy {:.0}%\n", with_default.accuracy(&t) * 100.0);
    }
}
