//! Fixtures and per-case checks shared by the property suite and the
//! acceptance harness. Checks return `Err(reason)` instead of panicking so the
//! acceptance harness can report them line by line.

#![allow(dead_code, clippy::neg_cmp_op_on_partial_ord)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use reann::clusterer::{cluster_pass, discretize_network, EpsilonSchedule};
use reann::dataset::{load_dataset, Dataset, DatasetSchema};
use reann::network::{Network, NetworkConfig};
use reann::pipeline::{run_reann, ExperimentConfig};
use reann::rex::{
    cluster_rules, default_rule, extract_rules, prune_rules, AttributeInfo, Condition,
    DiscreteTable, Rule, RuleSet, Verdict,
};
use reann::trainer::{replay_prune, Trainer};

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

/// Normalized dataset with continuous attributes `x1..xn` and classes `c0..ck`.
pub fn synthetic(rows: &[(Vec<f64>, usize)], class_count: usize) -> Dataset {
    let n = rows[0].0.len();
    let labels: Vec<String> = (0..class_count).map(|k| format!("\"c{k}\"")).collect();
    let mut schema = format!(
        "name = \"synthetic\"\nclass_labels = [{}]\n",
        labels.join(", ")
    );
    for i in 0..n {
        schema.push_str(&format!(
            "[[attributes]]\nname = \"x{}\"\nkind = \"continuous\"\n",
            i + 1
        ));
    }
    let schema = DatasetSchema::from_toml(&schema).expect("schema");
    let text: String = rows
        .iter()
        .map(|(x, c)| {
            let cells: Vec<String> = x.iter().map(|v| format!("{v:?}")).collect();
            format!("{},c{c}\n", cells.join(","))
        })
        .collect();
    load_dataset(&text, &schema).expect("rows").normalize()
}

pub fn xor() -> Dataset {
    synthetic(
        &[
            (vec![0.0, 0.0], 0),
            (vec![0.0, 1.0], 1),
            (vec![1.0, 0.0], 1),
            (vec![1.0, 1.0], 0),
        ],
        2,
    )
}

// gradients

fn numeric(net: &Network, x: &[f64], t: &[f64], w: f64, set: impl Fn(&mut Network, f64)) -> f64 {
    let h = 1e-5;
    let mut up = net.clone();
    set(&mut up, w + h);
    let mut down = net.clone();
    set(&mut down, w - h);
    (up.loss(x, t).unwrap() - down.loss(x, t).unwrap()) / (2.0 * h)
}

fn agree(analytic: f64, numeric: f64) -> bool {
    let scale = analytic.abs().max(numeric.abs());
    // both vanish: nothing left to compare above finite-difference noise
    scale < 1e-8 || (analytic - numeric).abs() / scale <= 1e-6
}

/// Analytic vs central-difference gradients for every weight and bias.
pub fn check_gradients(nets: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 0..nets {
        let (i, h, o) = (
            rng.gen_range(1..5),
            rng.gen_range(1..4),
            rng.gen_range(1..4),
        );
        let mut cfg = NetworkConfig::new(i, h, o, n as u64);
        cfg.weight_decay = 0.0;
        let net = Network::random(&cfg, &mut rng);
        let x: Vec<f64> = (0..i).map(|_| rng.gen_range(0.0..1.0)).collect();
        let mut t = vec![0.0; o];
        t[rng.gen_range(0..o)] = 1.0;
        let g = net.gradients(&x, &t).map_err(|e| e.to_string())?;

        for j in 0..h {
            for a in 0..i {
                let num = numeric(&net, &x, &t, net.input_hidden[j][a], |m, w| {
                    m.input_hidden[j][a] = w
                });
                ensure!(
                    agree(g.input_hidden[j][a], num),
                    "net {n} w_ih[{j}][{a}]: {} vs {num}",
                    g.input_hidden[j][a]
                );
            }
            let num = numeric(&net, &x, &t, net.hidden_bias[j], |m, w| {
                m.hidden_bias[j] = w
            });
            ensure!(
                agree(g.hidden_bias[j], num),
                "net {n} b_h[{j}]: {} vs {num}",
                g.hidden_bias[j]
            );
        }
        for k in 0..o {
            for j in 0..h {
                let num = numeric(&net, &x, &t, net.hidden_output[k][j], |m, w| {
                    m.hidden_output[k][j] = w
                });
                ensure!(
                    agree(g.hidden_output[k][j], num),
                    "net {n} w_ho[{k}][{j}]: {} vs {num}",
                    g.hidden_output[k][j]
                );
            }
            let num = numeric(&net, &x, &t, net.output_bias[k], |m, w| {
                m.output_bias[k] = w
            });
            ensure!(
                agree(g.output_bias[k], num),
                "net {n} b_o[{k}]: {} vs {num}",
                g.output_bias[k]
            );
        }
    }
    Ok(())
}

// clustering

pub fn random_series(rng: &mut impl Rng) -> Vec<f64> {
    let n = rng.gen_range(1..60);
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// Insertion soundness, centroid identity and coverage for one pass.
pub fn check_cluster_series(values: &[f64], eps: f64) -> Check {
    let pass = cluster_pass(values, eps);
    let m = &pass.model;

    let mut seeds: Vec<f64> = Vec::new();
    for (&v, &j) in values.iter().zip(&pass.joined) {
        if j == seeds.len() {
            ensure!(
                seeds.iter().all(|s| (v - s).abs() > eps),
                "{v} opened a cluster within {eps} of a seed"
            );
            seeds.push(v);
        } else {
            ensure!(j < seeds.len(), "{v} joined unopened cluster {j}");
            ensure!(
                (v - seeds[j]).abs() <= eps,
                "{v} joined seed {} beyond {eps}",
                seeds[j]
            );
        }
    }

    for j in 0..m.len() {
        let lhs = m.representatives[j] * m.counts[j] as f64;
        ensure!(
            (lhs - m.sums[j]).abs() <= 1e-12 * m.sums[j].abs().max(1.0),
            "cluster {j}: H*count {lhs} != sum {}",
            m.sums[j]
        );
    }

    ensure!(
        m.counts.iter().sum::<usize>() == values.len(),
        "counts do not add up"
    );
    for &v in values {
        ensure!(m.assign(v) < m.len(), "{v} has no cluster");
    }
    Ok(())
}

/// Cluster count at the smaller ε is never below the count at the larger.
pub fn check_refinement(values: &[f64], a: f64, b: f64) -> Check {
    let (small, large) = if a <= b { (a, b) } else { (b, a) };
    let fine = cluster_pass(values, small).model.len();
    let coarse = cluster_pass(values, large).model.len();
    ensure!(
        fine >= coarse,
        "{fine} clusters at {small} < {coarse} at {large} for {values:?}"
    );
    Ok(())
}

/// ε below the smallest gap between distinct activations keeps accuracy.
pub fn check_small_epsilon(nets: usize, seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 0..nets {
        let rows: Vec<(Vec<f64>, usize)> = (0..24)
            .map(|_| {
                (
                    vec![rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)],
                    rng.gen_range(0..3),
                )
            })
            .collect();
        let ds = synthetic(&rows, 3);
        let net = Network::random(&NetworkConfig::new(2, 3, 3, n as u64), &mut rng);
        let acts = net.hidden_activations(&ds).map_err(|e| e.to_string())?;
        let mut gap = f64::INFINITY;
        for a in &acts {
            let mut s = a.clone();
            s.sort_by(f64::total_cmp);
            s.dedup();
            for w in s.windows(2) {
                gap = gap.min(w[1] - w[0]);
            }
        }
        let eps = (gap / 2.0).min(0.5);
        let schedule = EpsilonSchedule {
            start: eps,
            factor: 0.5,
            floor: eps / 4.0,
        };
        let continuous = net.accuracy(&ds).map_err(|e| e.to_string())?;
        let d =
            discretize_network(&net, &ds, continuous, &schedule, 0.0).map_err(|e| e.to_string())?;
        ensure!(d.attempts == 1, "net {n}: {} attempts", d.attempts);
        ensure!(
            d.achieved_accuracy == continuous,
            "net {n}: {} discretized vs {continuous}",
            d.achieved_accuracy
        );
    }
    Ok(())
}

// REx

pub fn random_table(rng: &mut impl Rng) -> DiscreteTable {
    let attrs = rng.gen_range(1..=6);
    let rows = rng.gen_range(1..=64);
    let classes = rng.gen_range(2..=3);
    let ordered = rng.gen_bool(0.5);
    let arities: Vec<usize> = (0..attrs).map(|_| rng.gen_range(2..=4)).collect();
    let codes = (0..rows)
        .map(|_| arities.iter().map(|&a| rng.gen_range(0..a)).collect())
        .collect();
    let labels = (0..rows).map(|_| rng.gen_range(0..classes)).collect();
    let info = arities
        .iter()
        .map(|&arity| AttributeInfo { arity, ordered })
        .collect();
    DiscreteTable::new(info, codes, labels, classes)
}

pub fn rex(t: &DiscreteTable) -> RuleSet {
    default_rule(&prune_rules(&cluster_rules(&extract_rules(t)), t, 0), t)
}

/// Total coverage, no cross-class co-coverage, the consistency bound and
/// order-insensitive evaluation.
pub fn check_rex_table(t: &DiscreteTable, shuffle_seed: u64) -> Check {
    let rs = rex(t);
    for row in &t.rows {
        let v = rs.verdict(row);
        ensure!(
            !matches!(v, Verdict::Uncovered | Verdict::Conflict(_)),
            "{row:?}: {v:?}"
        );
    }

    let errors = t
        .rows
        .iter()
        .zip(&t.classes)
        .filter(|(r, &c)| rs.classify(r) != Some(c))
        .count();
    let collisions = (t.inconsistency_rate() * t.len() as f64).round() as usize;
    ensure!(
        errors <= collisions,
        "{errors} errors > {collisions} collisions"
    );

    let mut shuffled = rs.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(shuffle_seed);
    for i in (1..shuffled.rules.len()).rev() {
        shuffled.rules.swap(i, rng.gen_range(0..=i));
    }
    for row in &t.rows {
        ensure!(
            rs.classify(row) == shuffled.classify(row),
            "order changed the class of {row:?}"
        );
    }
    Ok(())
}

pub fn boolean_table(f: fn(usize, usize) -> usize) -> DiscreteTable {
    let rows: Vec<Vec<usize>> = (0..4).map(|i| vec![i & 1, i >> 1]).collect();
    let classes = rows.iter().map(|r| f(r[0], r[1])).collect();
    let attr = AttributeInfo {
        arity: 2,
        ordered: false,
    };
    DiscreteTable::new(vec![attr; 2], rows, classes, 2)
}

/// Fewest total conditions over all order-insensitive rule sets (with a
/// default) that classify the 2-input table exactly.
pub fn minimal_conditions(f: fn(usize, usize) -> usize) -> usize {
    let mut terms: Vec<Vec<Condition>> = vec![vec![]];
    for a in 0..2 {
        terms.push(vec![Condition::equals(a, 0)]);
        terms.push(vec![Condition::equals(a, 1)]);
    }
    for x in 0..2 {
        for y in 0..2 {
            terms.push(vec![Condition::equals(0, x), Condition::equals(1, y)]);
        }
    }
    let mut best = usize::MAX;
    for mask in 0u32..(1 << (terms.len() * 2)) {
        let rules: Vec<Rule> = (0..terms.len() * 2)
            .filter(|b| mask & (1 << b) != 0)
            .map(|b| Rule::new(terms[b / 2].clone(), b % 2))
            .collect();
        let size: usize = rules.iter().map(|r| r.conditions.len()).sum();
        if size >= best {
            continue;
        }
        for default in 0..2 {
            let exact = (0..4).all(|i| {
                let row = [i & 1, i >> 1];
                let want = f(row[0], row[1]);
                let fired: Vec<usize> = rules
                    .iter()
                    .filter(|r| r.covers(&row))
                    .map(|r| r.class)
                    .collect();
                if fired.is_empty() {
                    default == want
                } else {
                    fired.iter().all(|&c| c == want)
                }
            });
            if exact {
                best = size;
            }
        }
    }
    best
}

pub fn check_boolean_oracle() -> Check {
    type Case = (&'static str, fn(usize, usize) -> usize);
    let cases: [Case; 3] = [
        ("and", |a, b| a & b),
        ("or", |a, b| a | b),
        ("xor", |a, b| a ^ b),
    ];
    for (name, f) in cases {
        let t = boolean_table(f);
        let rs = rex(&t);
        ensure!(rs.accuracy(&t) == 1.0, "{name}: not exact");
        let (got, want) = (rs.condition_count(), minimal_conditions(f));
        ensure!(
            got == want,
            "{name}: {got} conditions, brute-force minimum {want}"
        );
    }
    Ok(())
}

// pruning and determinism

/// Replays a full pruning trace on iris and checks the final floor.
pub fn check_prune_replay(seed: u64) -> Check {
    let cfg = ExperimentConfig::bundled("iris").map_err(|e| e.to_string())?;
    let (train, _, _) = cfg.load_split().map_err(|e| e.to_string())?;
    let net_cfg = NetworkConfig::new(train.attribute_count(), 1, train.class_count(), seed);
    let mut trainer = Trainer::new(seed);
    let built = trainer
        .constructive_train(&net_cfg, &cfg.constructive, &train)
        .map_err(|e| e.to_string())?;
    let pruned = trainer
        .prune(&built.network, &cfg.prune, &train)
        .map_err(|e| e.to_string())?;
    ensure!(
        pruned.steps.iter().any(|s| s.committed),
        "nothing was pruned"
    );
    replay_prune(&built.network, &cfg.prune, &train, &pruned.steps).map_err(|e| e.to_string())?;
    let baseline = built.network.accuracy(&train).map_err(|e| e.to_string())?;
    ensure!(
        pruned.final_accuracy >= baseline - cfg.prune.accuracy_floor_drop,
        "final {} below baseline {baseline} - {}",
        pruned.final_accuracy,
        cfg.prune.accuracy_floor_drop
    );
    Ok(())
}

/// Two executions of the same config give byte-identical JSON reports.
pub fn check_determinism(dataset: &str, runs: usize) -> Check {
    let cfg = ExperimentConfig::bundled(dataset)
        .map_err(|e| e.to_string())?
        .with_seeds(5, runs);
    let a = run_reann(&cfg)
        .and_then(|r| r.to_json())
        .map_err(|e| e.to_string())?;
    let b = run_reann(&cfg)
        .and_then(|r| r.to_json())
        .map_err(|e| e.to_string())?;
    ensure!(a == b, "{dataset}: reports differ");
    Ok(())
}
