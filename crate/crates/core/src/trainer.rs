//! Network growth and pruning.
//!
//! Growth starts from a single hidden node and adds one node per stage while
//! the training accuracy keeps improving by at least `add_threshold`. Pruning
//! removes the smallest-magnitude active connection, retrains, and keeps the
//! removal only if training accuracy stays within `accuracy_floor_drop` of the
//! accuracy before pruning started.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::network::{Connection, EpochStats, Network, NetworkConfig};

const ACCURACY_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConstructiveSpec {
    pub max_hidden: usize,
    pub epochs_per_stage: usize,
    /// Minimum training-accuracy gain that justifies the last added node.
    pub add_threshold: f64,
    /// A stage ends early after this many epochs without MSE improvement.
    pub error_plateau_patience: usize,
    /// Smallest MSE decrease that counts as an improvement.
    #[serde(default = "default_plateau_delta")]
    pub plateau_min_delta: f64,
}

fn default_plateau_delta() -> f64 {
    1e-5
}

impl Default for ConstructiveSpec {
    fn default() -> Self {
        ConstructiveSpec {
            max_hidden: 5,
            epochs_per_stage: 50,
            add_threshold: 0.005,
            error_plateau_patience: 10,
            plateau_min_delta: default_plateau_delta(),
        }
    }
}

impl ConstructiveSpec {
    pub fn validate(&self) -> Result<()> {
        if self.max_hidden < 1 || self.epochs_per_stage < 1 || !(self.add_threshold >= 0.0) {
            return Err(Error::Config(
                "constructive spec needs max_hidden >= 1, epochs_per_stage >= 1, add_threshold >= 0"
                    .into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PruneSpec {
    /// Largest tolerated training-accuracy drop below the pre-pruning baseline.
    pub accuracy_floor_drop: f64,
    pub retrain_epochs: usize,
}

impl Default for PruneSpec {
    fn default() -> Self {
        PruneSpec {
            accuracy_floor_drop: 0.005,
            retrain_epochs: 25,
        }
    }
}

impl PruneSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.accuracy_floor_drop >= 0.0) {
            return Err(Error::Config("accuracy_floor_drop must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArchSummary {
    pub node_count: usize,
    pub connection_count: usize,
    pub layers: (usize, usize, usize),
}

impl ArchSummary {
    pub fn of(net: &Network) -> Self {
        ArchSummary {
            node_count: net.node_count(),
            connection_count: net.connection_count(),
            layers: net.layer_triple(),
        }
    }
}

impl std::fmt::Display for ArchSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let (i, h, o) = self.layers;
        write!(
            f,
            "{} ({i}-{h}-{o}) / {}",
            self.node_count, self.connection_count
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchitectureTrace {
    pub initial: ArchSummary,
    pub intermediate: ArchSummary,
    #[serde(rename = "final")]
    pub final_: ArchSummary,
    pub constructive_epochs: usize,
    pub total_epochs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    Constructive,
    Prune,
    Retrain,
}

/// One line of the training-error log.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub phase: Phase,
    pub mean_squared_error: f64,
    pub accuracy: f64,
}

/// Renders the epoch log as tab-separated text with a header line.
pub fn render_epoch_log(log: &[EpochRecord]) -> String {
    let mut out = String::from("epoch\tphase\tmse\taccuracy\n");
    for r in log {
        let phase = match r.phase {
            Phase::Constructive => "constructive",
            Phase::Prune => "prune",
            Phase::Retrain => "retrain",
        };
        out.push_str(&format!(
            "{}\t{}\t{:.6}\t{:.6}\n",
            r.epoch, phase, r.mean_squared_error, r.accuracy
        ));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub hidden_nodes: usize,
    pub epochs: usize,
    pub training_accuracy: f64,
}

#[derive(Debug, Clone)]
pub struct Constructed {
    pub network: Network,
    pub initial: ArchSummary,
    pub intermediate: ArchSummary,
    pub stages: Vec<StageRecord>,
    pub epochs: usize,
}

/// One pruning attempt, committed or rolled back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PruneStep {
    pub connection: Connection,
    pub weight: f64,
    /// Training accuracy after masking and retraining.
    pub accuracy: f64,
    pub floor: f64,
    pub committed: bool,
}

#[derive(Debug, Clone)]
pub struct Pruned {
    pub network: Network,
    pub baseline_accuracy: f64,
    pub floor: f64,
    pub final_accuracy: f64,
    pub steps: Vec<PruneStep>,
    /// Whether the closing retrain was kept (it is dropped if it breaks the floor).
    pub final_retrain_kept: bool,
    pub summary: ArchSummary,
    pub epochs: usize,
}

/// Owns the seeded random stream and the epoch log of one run.
#[derive(Debug, Clone)]
pub struct Trainer {
    rng: ChaCha8Rng,
    pub log: Vec<EpochRecord>,
    epoch: usize,
}

impl Trainer {
    pub fn new(seed: u64) -> Self {
        Trainer {
            rng: ChaCha8Rng::seed_from_u64(seed),
            log: Vec::new(),
            epoch: 0,
        }
    }

    fn epoch(&mut self, net: &mut Network, train: &Dataset, phase: Phase) -> Result<EpochStats> {
        let stats = net.train_epoch(train)?;
        self.epoch += 1;
        self.log.push(EpochRecord {
            epoch: self.epoch,
            phase,
            mean_squared_error: stats.mean_squared_error,
            accuracy: stats.training_accuracy,
        });
        Ok(stats)
    }

    /// Runs `epochs` epochs honoring the masks.
    pub fn retrain(&mut self, net: &Network, epochs: usize, train: &Dataset) -> Result<Network> {
        self.retrain_phase(net, epochs, train, Phase::Retrain)
    }

    fn retrain_phase(
        &mut self,
        net: &Network,
        epochs: usize,
        train: &Dataset,
        phase: Phase,
    ) -> Result<Network> {
        if net.active_hidden_count() == 0 {
            return Err(Error::NoActiveHidden);
        }
        let mut net = net.clone();
        for _ in 0..epochs {
            self.epoch(&mut net, train, phase)?;
        }
        Ok(net)
    }

    /// Grows the hidden layer from one node. Weight decay is off during growth.
    pub fn constructive_train(
        &mut self,
        cfg: &NetworkConfig,
        spec: &ConstructiveSpec,
        train: &Dataset,
    ) -> Result<Constructed> {
        cfg.validate()?;
        spec.validate()?;
        if cfg.hidden_count != 1 {
            return Err(Error::Config(
                "constructive training starts from one hidden node".into(),
            ));
        }
        if cfg.input_count != train.attribute_count() || cfg.output_count != train.class_count() {
            return Err(Error::Dimension {
                expected: train.attribute_count(),
                actual: cfg.input_count,
            });
        }
        let mut net = Network::random(cfg, &mut self.rng);
        let initial = ArchSummary::of(&net);
        net.weight_decay = 0.0;

        let start_epoch = self.epoch;
        let mut stages = Vec::new();
        let mut previous: Option<(Network, f64)> = None;
        let chosen = loop {
            self.train_stage(&mut net, spec, train)?;
            let acc = net.accuracy(train)?;
            stages.push(StageRecord {
                hidden_nodes: net.hidden_count(),
                epochs: self.epoch - start_epoch,
                training_accuracy: acc,
            });
            if let Some((prev, prev_acc)) = previous.take() {
                if acc - prev_acc < spec.add_threshold {
                    // ties keep the smaller network
                    break if acc > prev_acc { net } else { prev };
                }
            }
            if net.hidden_count() >= spec.max_hidden || acc >= 1.0 {
                break net;
            }
            previous = Some((net.clone(), acc));
            net.add_hidden_node(&mut self.rng, cfg.weight_init_range);
        };

        let mut network = chosen;
        network.weight_decay = cfg.weight_decay;
        let intermediate = ArchSummary::of(&network);
        Ok(Constructed {
            network,
            initial,
            intermediate,
            stages,
            epochs: self.epoch - start_epoch,
        })
    }

    fn train_stage(
        &mut self,
        net: &mut Network,
        spec: &ConstructiveSpec,
        train: &Dataset,
    ) -> Result<()> {
        let mut best = f64::INFINITY;
        let mut stale = 0;
        for _ in 0..spec.epochs_per_stage {
            let stats = self.epoch(net, train, Phase::Constructive)?;
            if stats.mean_squared_error < best - spec.plateau_min_delta {
                best = stats.mean_squared_error;
                stale = 0;
            } else {
                stale += 1;
                if spec.error_plateau_patience > 0 && stale >= spec.error_plateau_patience {
                    break;
                }
            }
        }
        Ok(())
    }

    /// Magnitude pruning with retraining under an accuracy floor.
    pub fn prune(&mut self, net: &Network, spec: &PruneSpec, train: &Dataset) -> Result<Pruned> {
        spec.validate()?;
        if net.active_hidden_count() == 0 {
            return Err(Error::NoActiveHidden);
        }
        let start_epoch = self.epoch;
        let baseline = net.accuracy(train)?;
        let floor = baseline - spec.accuracy_floor_drop;
        let mut current = net.clone();
        let mut current_acc = baseline;
        let mut unprunable: Vec<Connection> = Vec::new();
        let mut steps = Vec::new();

        while let Some(c) = smallest_candidate(&current, &unprunable) {
            let weight = current.weight(c);
            let mut trial = current.clone();
            trial.mask(c);
            if trial.active_hidden_count() == 0 {
                unprunable.push(c);
                continue;
            }
            let trial = self.retrain_phase(&trial, spec.retrain_epochs, train, Phase::Prune)?;
            let acc = trial.accuracy(train)?;
            let committed = acc + ACCURACY_EPS >= floor;
            steps.push(PruneStep {
                connection: c,
                weight,
                accuracy: acc,
                floor,
                committed,
            });
            if committed {
                current = trial;
                current_acc = acc;
            } else {
                unprunable.push(c);
            }
        }

        let retrained = self.retrain_phase(&current, spec.retrain_epochs, train, Phase::Retrain)?;
        let retrained_acc = retrained.accuracy(train)?;
        let final_retrain_kept = retrained_acc + ACCURACY_EPS >= floor;
        if final_retrain_kept {
            current = retrained;
            current_acc = retrained_acc;
        }

        Ok(Pruned {
            summary: ArchSummary::of(&current),
            network: current,
            baseline_accuracy: baseline,
            floor,
            final_accuracy: current_acc,
            steps,
            final_retrain_kept,
            epochs: self.epoch - start_epoch,
        })
    }
}

/// Smallest-|w| active connection not yet marked unprunable; earlier
/// connections in [`Network::active_connections`] order win ties.
fn smallest_candidate(net: &Network, unprunable: &[Connection]) -> Option<Connection> {
    net.active_connections()
        .into_iter()
        .filter(|c| !unprunable.contains(c))
        .fold(None, |best: Option<(Connection, f64)>, c| {
            let w = net.weight(c).abs();
            match best {
                Some((_, bw)) if bw <= w => best,
                _ => Some((c, w)),
            }
        })
        .map(|(c, _)| c)
}

/// Runs `epochs` epochs on a copy of `net`.
pub fn retrain(net: &Network, epochs: usize, train: &Dataset) -> Result<Network> {
    Trainer::new(0).retrain(net, epochs, train)
}

/// Re-executes a pruning trace from the pre-pruning network and checks that
/// every step reproduces its recorded accuracy and that each commit met the
/// floor. Returns the network before the closing retrain.
pub fn replay_prune(
    net: &Network,
    spec: &PruneSpec,
    train: &Dataset,
    steps: &[PruneStep],
) -> Result<Network> {
    let mut current = net.clone();
    for (n, step) in steps.iter().enumerate() {
        let mut trial = current.clone();
        trial.mask(step.connection);
        let trial = retrain(&trial, spec.retrain_epochs, train)?;
        let acc = trial.accuracy(train)?;
        if acc != step.accuracy {
            return Err(Error::Config(format!(
                "step {n}: replayed accuracy {acc} differs from recorded {}",
                step.accuracy
            )));
        }
        if step.committed {
            if acc + ACCURACY_EPS < step.floor {
                return Err(Error::Config(format!(
                    "step {n}: committed below floor ({acc} < {})",
                    step.floor
                )));
            }
            current = trial;
        }
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{
        load_dataset, AttributeKind, AttributeSpec, DatasetSchema, SCHEMA_FORMAT,
    };

    fn table(rows: &[(&[f64], usize)], classes: usize) -> Dataset {
        let n_attr = rows[0].0.len();
        let schema = DatasetSchema {
            format: SCHEMA_FORMAT.into(),
            name: "toy".into(),
            delimiter: Default::default(),
            leading_id: false,
            missing_marker: "?".into(),
            class_labels: (0..classes).map(|c| c.to_string()).collect(),
            class_names: (0..classes).map(|c| c.to_string()).collect(),
            train_count: None,
            normalization: Default::default(),
            threshold_units: Default::default(),
            precision: 2,
            attributes: (0..n_attr)
                .map(|i| AttributeSpec {
                    name: format!("x{i}"),
                    kind: AttributeKind::Continuous,
                    min: None,
                    max: None,
                    categories: vec![],
                })
                .collect(),
        };
        let text: String = rows
            .iter()
            .map(|(x, c)| {
                let mut f: Vec<String> = x.iter().map(|v| v.to_string()).collect();
                f.push(c.to_string());
                f.join(",") + "\n"
            })
            .collect();
        load_dataset(&text, &schema).unwrap().normalize()
    }

    #[test]
    fn zero_epoch_retrain_is_identity() {
        let ds = table(&[(&[0.0, 1.0], 0), (&[1.0, 0.0], 1)], 2);
        let net = crate::network::init_network(&NetworkConfig::new(2, 1, 2, 4));
        assert_eq!(retrain(&net, 0, &ds).unwrap(), net);
    }

    #[test]
    fn retrain_rejects_empty_hidden_layer() {
        let ds = table(&[(&[0.0, 1.0], 0), (&[1.0, 0.0], 1)], 2);
        let mut net = crate::network::init_network(&NetworkConfig::new(2, 1, 2, 4));
        net.mask(Connection::HiddenOutput {
            hidden: 0,
            output: 0,
        });
        net.mask(Connection::HiddenOutput {
            hidden: 0,
            output: 1,
        });
        assert!(matches!(retrain(&net, 3, &ds), Err(Error::NoActiveHidden)));
    }

    #[test]
    fn zero_weight_connection_goes_first() {
        let mut net = crate::network::init_network(&NetworkConfig::new(3, 1, 2, 9));
        net.input_hidden[0][1] = 0.0;
        assert_eq!(
            smallest_candidate(&net, &[]),
            Some(Connection::InputHidden {
                input: 1,
                hidden: 0
            })
        );
    }

    #[test]
    fn pruning_dead_input_keeps_accuracy() {
        // x1 decides the class, x0 is constant noise-free filler
        let rows: Vec<(Vec<f64>, usize)> = (0..20)
            .map(|i| {
                let x = i as f64 / 19.0;
                (vec![0.5, x], usize::from(x > 0.5))
            })
            .collect();
        let refs: Vec<(&[f64], usize)> = rows.iter().map(|(x, c)| (x.as_slice(), *c)).collect();
        let ds = table(&refs, 2);
        let mut cfg = NetworkConfig::new(2, 1, 2, 3);
        cfg.learning_rate = 0.5;
        let mut trainer = Trainer::new(cfg.seed);
        let grown = trainer
            .constructive_train(
                &cfg,
                &ConstructiveSpec {
                    epochs_per_stage: 300,
                    error_plateau_patience: 0,
                    ..Default::default()
                },
                &ds,
            )
            .unwrap();
        let mut net = grown.network;
        net.input_hidden[0][0] = 0.0;
        let spec = PruneSpec::default();
        let pruned = trainer.prune(&net, &spec, &ds).unwrap();
        assert_eq!(
            pruned.steps[0].connection,
            Connection::InputHidden {
                input: 0,
                hidden: 0
            }
        );
        assert!(pruned.steps[0].committed);
        assert!(
            pruned.final_accuracy + 1e-12 >= pruned.baseline_accuracy - spec.accuracy_floor_drop
        );
        assert!(!pruned.network.input_active[0]);
    }
}
