use std::collections::BTreeSet;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clusterer::{discretize_network, DiscretizedNetwork, NodeDiscretization};
use crate::dataset::{discretize_inputs, Dataset, DatasetSchema, DiscretizedView};
use crate::error::{Error, Result};
use crate::network::{Network, NetworkConfig};
use crate::rex::{
    cluster_rules, default_rule, extract_rules, merge_layers, prune_rules, simplify, AttributeInfo,
    Condition, DiscreteTable, InputRules, Lexicon, Rule, RuleEvaluation, RuleLoopSpec, RuleMetrics,
    RuleSet, SimplifyRound, SymbolicRuleSet,
};
use crate::trainer::{ArchitectureTrace, Constructed, Pruned, StageRecord, Trainer};

use super::config::ExperimentConfig;
use super::report::ExperimentReport;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Load,
    Train,
    Prune,
    Discretize,
    Extract,
    Evaluate,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stage::Load => "load",
            Stage::Train => "train",
            Stage::Prune => "prune",
            Stage::Discretize => "discretize",
            Stage::Extract => "extract",
            Stage::Evaluate => "evaluate",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageFailure {
    pub stage: Stage,
    pub message: String,
}

/// Wall-clock time per stage, in milliseconds. Never serialized, so reports
/// stay byte-stable.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StageTimings {
    pub train_ms: f64,
    pub prune_ms: f64,
    pub discretize_ms: f64,
    pub extract_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    pub train: f64,
    pub test: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSummary {
    pub hidden: usize,
    /// Empty for a constant node.
    pub representatives: Vec<f64>,
    pub counts: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constant: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizationSummary {
    pub epsilon: f64,
    pub attempts: usize,
    pub required_accuracy: f64,
    pub achieved_accuracy: f64,
    /// ε reached its floor before the requirement was met; the best attempt was kept.
    pub shortfall: bool,
    pub nodes: Vec<NodeSummary>,
}

impl DiscretizationSummary {
    fn of(d: &DiscretizedNetwork, shortfall: bool) -> Self {
        DiscretizationSummary {
            epsilon: d.epsilon,
            attempts: d.attempts,
            required_accuracy: d.required_accuracy,
            achieved_accuracy: d.achieved_accuracy,
            shortfall,
            nodes: d
                .models
                .iter()
                .map(|m| match &m.model {
                    NodeDiscretization::Constant { value } => NodeSummary {
                        hidden: m.hidden,
                        representatives: Vec::new(),
                        counts: Vec::new(),
                        constant: Some(*value),
                    },
                    NodeDiscretization::Clustered { model } => NodeSummary {
                        hidden: m.hidden,
                        representatives: model.representatives.clone(),
                        counts: model.counts.clone(),
                        constant: None,
                    },
                })
                .collect(),
        }
    }
}

/// Everything one successful run produces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub architecture: ArchitectureTrace,
    pub growth: Vec<StageRecord>,
    pub inputs_pruned: usize,
    pub prune_attempts: usize,
    pub network_accuracy: Accuracy,
    pub discretization: DiscretizationSummary,
    pub inconsistency_rate: f64,
    pub rule_loop: Vec<SimplifyRound>,
    /// Training rule accuracy the loop had to keep.
    pub rule_floor: f64,
    pub rules: SymbolicRuleSet,
    pub metrics: RuleMetrics,
    pub rule_train: RuleEvaluation,
    pub rule_test: RuleEvaluation,
}

impl RunOutcome {
    /// Rule training accuracy reached the discretized requirement minus the allowance.
    pub fn accuracy_chain_holds(&self) -> bool {
        self.rule_train.accuracy + 1e-12 >= self.rule_floor
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<RunOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<StageFailure>,
    #[serde(skip)]
    pub timings: StageTimings,
}

/// Phases 1 and 2 for one seed.
#[derive(Debug, Clone)]
pub struct Trained {
    pub constructed: Constructed,
    pub pruned: Pruned,
    pub trainer: Trainer,
}

impl Trained {
    pub fn network(&self) -> &Network {
        &self.pruned.network
    }

    pub fn trace(&self) -> ArchitectureTrace {
        ArchitectureTrace {
            initial: self.constructed.initial,
            intermediate: self.constructed.intermediate,
            final_: self.pruned.summary,
            constructive_epochs: self.constructed.epochs,
            total_epochs: self.constructed.epochs + self.pruned.epochs,
        }
    }
}

/// Constructive training followed by pruning.
pub fn train_phases(cfg: &ExperimentConfig, seed: u64, train: &Dataset) -> Result<Trained> {
    train_phases_timed(cfg, seed, train, &mut StageTimings::default()).map_err(|(_, e)| e)
}

fn train_phases_timed(
    cfg: &ExperimentConfig,
    seed: u64,
    train: &Dataset,
    timings: &mut StageTimings,
) -> std::result::Result<Trained, (Stage, Error)> {
    let mut net_cfg = NetworkConfig::new(train.attribute_count(), 1, train.class_count(), seed);
    net_cfg.learning_rate = cfg.network.learning_rate;
    net_cfg.weight_init_range = cfg.network.weight_init_range;
    net_cfg.weight_decay = cfg.network.weight_decay;

    let mut trainer = Trainer::new(seed);
    let t = Instant::now();
    let constructed = trainer
        .constructive_train(&net_cfg, &cfg.constructive, train)
        .map_err(|e| (Stage::Train, e))?;
    timings.train_ms = ms(t);
    let t = Instant::now();
    let pruned = trainer
        .prune(&constructed.network, &cfg.prune, train)
        .map_err(|e| (Stage::Prune, e))?;
    timings.prune_ms = ms(t);
    Ok(Trained {
        constructed,
        pruned,
        trainer,
    })
}

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Phases 3 and 4 on a trained network.
#[derive(Debug, Clone)]
pub struct Extraction {
    pub discretized: DiscretizedNetwork,
    pub shortfall: bool,
    pub view: DiscretizedView,
    pub hidden_rules: RuleSet,
    pub merged: RuleSet,
    pub rules: RuleSet,
    pub rounds: Vec<SimplifyRound>,
    pub rule_floor: f64,
    pub inconsistency_rate: f64,
    pub symbolic: SymbolicRuleSet,
}

/// Discretizes the hidden layer and extracts rules over the inputs.
pub fn extract_phases(
    cfg: &ExperimentConfig,
    net: &Network,
    train: &Dataset,
    schema: &DatasetSchema,
) -> Result<Extraction> {
    let mut timings = StageTimings::default();
    extract_phases_timed(cfg, net, train, schema, &mut timings).map_err(|(_, e)| e)
}

fn extract_phases_timed(
    cfg: &ExperimentConfig,
    net: &Network,
    train: &Dataset,
    schema: &DatasetSchema,
    timings: &mut StageTimings,
) -> std::result::Result<Extraction, (Stage, Error)> {
    let t = Instant::now();
    let disc_err = |e| (Stage::Discretize, e);
    let network_accuracy = net.accuracy(train).map_err(disc_err)?;
    let required = cfg.clustering.required.resolve(network_accuracy);
    let (discretized, shortfall) = match discretize_network(
        net,
        train,
        required,
        &cfg.clustering.epsilon,
        cfg.clustering.constant_tolerance,
    ) {
        Ok(d) => (d, false),
        Err(Error::EpsilonExhausted { best, .. }) => (*best, true),
        Err(e) => return Err(disc_err(e)),
    };
    timings.discretize_ms = ms(t);

    let t = Instant::now();
    let ext = |e| (Stage::Extract, e);
    let acts = net.hidden_activations(train).map_err(ext)?;
    let hidden_codes: Vec<Vec<usize>> = (0..train.len())
        .map(|p| {
            let h: Vec<f64> = (0..net.hidden_count()).map(|j| acts[j][p]).collect();
            discretized.codes(&h)
        })
        .collect();
    let clustered: Vec<(usize, usize)> =
        discretized.clustered().map(|(j, m)| (j, m.len())).collect();

    // hidden -> output, labeled by the discretized network
    let hidden_table = DiscreteTable::new(
        clustered
            .iter()
            .map(|&(_, arity)| AttributeInfo {
                arity,
                ordered: false,
            })
            .collect(),
        hidden_codes.clone(),
        hidden_codes
            .iter()
            .map(|c| discretized.class_of_codes(c))
            .collect(),
        train.class_count(),
    );
    let hidden_rules = rex_pass(&hidden_table, 0, false);

    // input -> hidden, one table per clustered node over its own inputs
    let view = discretize_inputs(train, cfg.rex.bins_per_attribute);
    let input_table = DiscreteTable::new(
        view.attributes
            .iter()
            .map(|b| AttributeInfo {
                arity: b.arity(),
                ordered: b.is_ordered(),
            })
            .collect(),
        view.codes.clone(),
        train.classes(),
        train.class_count(),
    );
    let mut per_code = Vec::with_capacity(clustered.len());
    for (k, &(j, arity)) in clustered.iter().enumerate() {
        let inputs: Vec<usize> = net
            .active_inputs()
            .filter(|&i| net.input_hidden_mask[j][i])
            .collect();
        let labels: Vec<usize> = hidden_codes.iter().map(|c| c[k]).collect();
        let table = input_table.project(&inputs).relabel(labels, arity);
        per_code.push(input_rules_for_node(&table, &inputs, arity));
    }
    let merged = merge_layers(&hidden_rules, &InputRules { per_code }).map_err(ext)?;

    // final pass against the true labels, then the accuracy-gated loop
    let noise = cfg.rex.noise_floor_for(train.len());
    let pruned = prune_rules(&cluster_rules(&merged), &input_table, noise);
    let start = default_rule(&pruned, &input_table);
    let rule_floor = discretized.required_accuracy - cfg.rex.allowance;
    let (rules, rounds) = simplify(
        &start,
        &input_table,
        &RuleLoopSpec {
            round_tolerance: cfg.rex.round_tolerance,
            floor: rule_floor,
            max_rounds: cfg.rex.max_rounds,
        },
    );
    let lexicon = Lexicon::new(schema, &view, train.normalization.as_ref());
    let symbolic = lexicon.symbolic(&rules).map_err(ext)?;
    timings.extract_ms = ms(t);

    Ok(Extraction {
        discretized,
        shortfall,
        inconsistency_rate: input_table.inconsistency_rate(),
        view,
        hidden_rules,
        merged,
        rules,
        rounds,
        rule_floor,
        symbolic,
    })
}

/// Covering, grouping and pruning; optionally with a default rule.
fn rex_pass(table: &DiscreteTable, noise_floor: usize, with_default: bool) -> RuleSet {
    let rs = prune_rules(&cluster_rules(&extract_rules(table)), table, noise_floor);
    if with_default {
        default_rule(&rs, table)
    } else {
        rs
    }
}

/// Rules over input codes for every cluster code of one hidden node, with
/// attributes mapped back to input indices. A code that no rule concludes
/// (its patterns are outvoted inside their input cells) gets one exact rule
/// per distinct input cell it occurs in.
fn input_rules_for_node(table: &DiscreteTable, inputs: &[usize], arity: usize) -> Vec<Vec<Rule>> {
    let remap = |conds: &[Condition]| -> Vec<Condition> {
        conds
            .iter()
            .map(|c| Condition {
                attribute: inputs[c.attribute],
                ..*c
            })
            .collect()
    };
    let mut out: Vec<Vec<Rule>> = vec![Vec::new(); arity];
    for r in rex_pass(table, 0, false).rules {
        out[r.class].push(Rule::new(remap(&r.conditions), r.class));
    }
    for (code, rules) in out.iter_mut().enumerate() {
        if !rules.is_empty() {
            continue;
        }
        let cells: BTreeSet<&Vec<usize>> = table
            .rows
            .iter()
            .zip(&table.classes)
            .filter(|(_, &c)| c == code)
            .map(|(r, _)| r)
            .collect();
        for cell in cells {
            let conds: Vec<Condition> = cell
                .iter()
                .enumerate()
                .map(|(a, &v)| Condition::equals(a, v))
                .collect();
            rules.push(Rule::new(remap(&conds), code));
        }
    }
    out
}

/// Full pipeline for one seed on an already loaded split.
pub fn run_seed(
    cfg: &ExperimentConfig,
    seed: u64,
    train: &Dataset,
    test: &Dataset,
    schema: &DatasetSchema,
) -> RunRecord {
    let mut timings = StageTimings::default();
    let result = run_seed_inner(cfg, seed, train, test, schema, &mut timings);
    match result {
        Ok(outcome) => RunRecord {
            seed,
            outcome: Some(outcome),
            failure: None,
            timings,
        },
        Err((stage, e)) => RunRecord {
            seed,
            outcome: None,
            failure: Some(StageFailure {
                stage,
                message: e.to_string(),
            }),
            timings,
        },
    }
}

fn run_seed_inner(
    cfg: &ExperimentConfig,
    seed: u64,
    train: &Dataset,
    test: &Dataset,
    schema: &DatasetSchema,
    timings: &mut StageTimings,
) -> std::result::Result<RunOutcome, (Stage, Error)> {
    let trained = train_phases_timed(cfg, seed, train, timings)?;
    let net = trained.network();
    let ex = extract_phases_timed(cfg, net, train, schema, timings)?;

    let eval = |e| (Stage::Evaluate, e);
    let network_accuracy = Accuracy {
        train: net.accuracy(train).map_err(eval)?,
        test: net.accuracy(test).map_err(eval)?,
    };
    let rule_train = crate::rex::evaluate_rules(&ex.symbolic, train).map_err(eval)?;
    let rule_test = crate::rex::evaluate_rules(&ex.symbolic, test).map_err(eval)?;
    let metrics = RuleMetrics {
        rule_count: ex.symbolic.rules.len(),
        avg_conditions: ex.symbolic.avg_conditions(),
        accuracy_train: rule_train.accuracy,
        accuracy_test: rule_test.accuracy,
    };
    Ok(RunOutcome {
        architecture: trained.trace(),
        growth: trained.constructed.stages.clone(),
        inputs_pruned: net.input_count() - net.active_input_count(),
        prune_attempts: trained.pruned.steps.len(),
        network_accuracy,
        discretization: DiscretizationSummary::of(&ex.discretized, ex.shortfall),
        inconsistency_rate: ex.inconsistency_rate,
        rule_loop: ex.rounds,
        rule_floor: ex.rule_floor,
        rules: ex.symbolic,
        metrics,
        rule_train,
        rule_test,
    })
}

/// Runs every configured seed (in parallel) and aggregates the results.
///
/// Only configuration and dataset loading errors are returned; a failing run
/// is recorded in the report instead.
pub fn run_reann(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let (train, test, schema) = cfg.load_split()?;
    let runs: Vec<RunRecord> = cfg
        .seed_list()
        .into_par_iter()
        .map(|seed| run_seed(cfg, seed, &train, &test, &schema))
        .collect();
    Ok(ExperimentReport::new(cfg.clone(), runs))
}
