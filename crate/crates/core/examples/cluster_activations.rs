//! Single-pass clustering of one activation series, then discretization of a
//! whole trained hidden layer with the shrinking-epsilon schedule.
//!
//! cargo run --release --example cluster_activations

use reann::clusterer::{
    cluster_activations, discretize_network, EpsilonSchedule, NodeDiscretization,
};
use reann::pipeline::{train_phases, ExperimentConfig};

fn main() -> anyhow::Result<()> {
    let series = [-0.95, -0.9, 0.1, 0.12, -0.88, 0.93, 0.97, 0.08, 0.95];
    for eps in [0.6, 0.3, 0.05] {
        let m = cluster_activations(&series, eps);
        let codes: Vec<usize> = series.iter().map(|&d| m.assign(d)).collect();
        let means: Vec<String> = m
            .representatives
            .iter()
            .map(|h| format!("{h:.3}"))
            .collect();
        println!(
            "epsilon {eps:<4}: means [{}], codes {codes:?}",
            means.join(", ")
        );
    }

    let cfg = ExperimentConfig::bundled("iris")?;
    let (train, _, _) = cfg.load_split()?;
    let net = train_phases(&cfg, 1, &train)?.pruned.network;
    let acc = net.accuracy(&train)?;
    let d = discretize_network(&net, &train, acc, &EpsilonSchedule::default(), 1e-3)?;
    println!(
        "\niris network: {:.2}% continuous, {:.2}% discretized at epsilon {}",
        acc * 100.0,
        d.achieved_accuracy * 100.0,
        d.epsilon
    );
    for h in &d.models {
        match &h.model {
            NodeDiscretization::Constant { value } => {
                println!("  hidden {}: constant {value:.3}", h.hidden + 1)
            }
            NodeDiscretization::Clustered { model } => {
                println!("  hidden {}: {} clusters", h.hidden + 1, model.len())
            }
        }
    }
    Ok(())
}
