//! Constructive growth and magnitude pruning on iris, then a replay of the
//! pruning trace to show it is reproducible.
//!
//! cargo run --release --example train_and_prune [seed]

use reann::network::NetworkConfig;
use reann::pipeline::ExperimentConfig;
use reann::trainer::{replay_prune, Trainer};

fn main() -> anyhow::Result<()> {
    let seed = std::env::args().nth(1).map_or(Ok(7), |s| s.parse())?;
    let cfg = ExperimentConfig::bundled("iris")?;
    let (train, test, _) = cfg.load_split()?;

    let net_cfg = NetworkConfig::new(train.attribute_count(), 1, train.class_count(), seed);
    let mut trainer = Trainer::new(seed);
    let built = trainer.constructive_train(&net_cfg, &cfg.constructive, &train)?;
    for s in &built.stages {
        println!(
            "{} hidden: {:>4} epochs, train accuracy {:.2}%",
            s.hidden_nodes,
            s.epochs,
            s.training_accuracy * 100.0
        );
    }

    let pruned = trainer.prune(&built.network, &cfg.prune, &train)?;
    let committed = pruned.steps.iter().filter(|s| s.committed).count();
    println!(
        "\npruning: {} attempts, {committed} committed, floor {:.2}%",
        pruned.steps.len(),
        pruned.floor * 100.0
    );
    println!("{} -> {}", built.intermediate, pruned.summary);
    let net = &pruned.network;
    let kept: Vec<String> = net.active_inputs().map(|i| format!("A{}", i + 1)).collect();
    println!("inputs kept: {}", kept.join(" "));
    println!(
        "accuracy {:.2}% train, {:.2}% test",
        net.accuracy(&train)? * 100.0,
        net.accuracy(&test)? * 100.0
    );

    replay_prune(&built.network, &cfg.prune, &train, &pruned.steps)?;
    println!("replay: every step reproduced its recorded accuracy");
    Ok(())
}
