//! Extract rules once, save them as JSON, load them back and score them on
//! the held-out split. The same file works with `reann evaluate`.
//!
//! cargo run --release --example rules_file [dataset] [seed]

use reann::pipeline::{extract_phases, train_phases, ExperimentConfig};
use reann::rex::{evaluate_rules, SymbolicRuleSet};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "breast-cancer".into());
    let seed = args.next().map_or(Ok(1), |s| s.parse())?;

    let cfg = ExperimentConfig::bundled(&name)?;
    let (train, test, schema) = cfg.load_split()?;
    let trained = train_phases(&cfg, seed, &train)?;
    let ex = extract_phases(&cfg, trained.network(), &train, &schema)?;

    let path = std::env::temp_dir().join(format!("{name}-{seed}.rules.json"));
    std::fs::write(&path, ex.symbolic.to_json()?)?;
    println!("wrote {}", path.display());

    let rules = SymbolicRuleSet::from_json(&std::fs::read_to_string(&path)?)?;
    assert_eq!(rules, ex.symbolic);
    print!("{}", rules.render_text());
    for (split, ds) in [("train", &train), ("test", &test)] {
        let e = evaluate_rules(&rules, ds)?;
        println!(
            "{split}: {:.2}% ({} of {}), {} conflicts",
            e.accuracy * 100.0,
            e.correct,
            e.total,
            e.conflicts
        );
    }
    Ok(())
}
