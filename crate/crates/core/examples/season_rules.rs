//! One seed of the full pipeline on the season data, step by step.
//!
//! cargo run --release --example season_rules

use reann::pipeline::{extract_phases, train_phases, ExperimentConfig};

fn main() -> anyhow::Result<()> {
    let cfg = ExperimentConfig::bundled("season")?;
    let (train, _, schema) = cfg.load_split()?;

    let trained = train_phases(&cfg, 1, &train)?;
    let trace = trained.trace();
    println!(
        "constructed {}, pruned {}",
        trace.intermediate, trace.final_
    );

    let ex = extract_phases(&cfg, trained.network(), &train, &schema)?;
    println!(
        "hidden layer clustered at epsilon {} ({} pass(es)), discretized accuracy {:.2}%",
        ex.discretized.epsilon,
        ex.discretized.attempts,
        ex.discretized.achieved_accuracy * 100.0
    );
    println!(
        "{} merged rules -> {} after pruning and simplification\n",
        ex.merged.len(),
        ex.rules.len()
    );
    print!("{}", ex.symbolic.render_text());
    Ok(())
}
