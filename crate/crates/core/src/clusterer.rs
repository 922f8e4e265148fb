//! Hidden-activation discretization.
//!
//! Each hidden node's activations over the training set are clustered in one
//! pass in pattern order: the first value seeds cluster 1, every later value
//! joins the cluster with the nearest seed when that distance is at most ε and
//! opens a new cluster otherwise. After the pass each representative becomes
//! the mean of its members. If the network loses accuracy when activations are
//! replaced by their representatives, ε shrinks and the pass is repeated.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::network::{classify, Network};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    pub epsilon: f64,
    /// Finalized representatives `H(j) = sum(j) / count(j)`.
    pub representatives: Vec<f64>,
    pub counts: Vec<usize>,
    pub sums: Vec<f64>,
    /// First member of each cluster, used for distance tests during the pass.
    pub seeds: Vec<f64>,
}

impl ClusterModel {
    pub fn len(&self) -> usize {
        self.representatives.len()
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }

    /// Index of the nearest representative; the lowest index wins ties.
    pub fn assign(&self, delta: f64) -> usize {
        nearest(&self.representatives, delta)
    }

    pub fn discretize(&self, delta: f64) -> f64 {
        self.representatives[self.assign(delta)]
    }
}

pub fn assign(model: &ClusterModel, delta: f64) -> usize {
    model.assign(delta)
}

fn nearest(points: &[f64], delta: f64) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, &h) in points.iter().enumerate() {
        let d = (delta - h).abs();
        if d < best_d {
            best = j;
            best_d = d;
        }
    }
    best
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Result of a clustering pass together with the cluster each value joined.
#[derive(Debug, Clone)]
pub struct ClusterPass {
    pub model: ClusterModel,
    /// Cluster index (before finalization merges) chosen for each value.
    pub joined: Vec<usize>,
}

/// Single pass over `values` in order; see the module docs.
pub fn cluster_activations(values: &[f64], epsilon: f64) -> ClusterModel {
    cluster_pass(values, epsilon).model
}

pub fn cluster_pass(values: &[f64], epsilon: f64) -> ClusterPass {
    assert!(!values.is_empty(), "clustering needs at least one value");
    let mut seeds = vec![values[0]];
    let mut sums = vec![CompensatedSum::default()];
    sums[0].add(values[0]);
    let mut counts = vec![1usize];
    let mut lo = vec![values[0]];
    let mut hi = vec![values[0]];
    let mut joined = vec![0];

    for &delta in &values[1..] {
        let j = nearest(&seeds, delta);
        if (delta - seeds[j]).abs() <= epsilon {
            counts[j] += 1;
            sums[j].add(delta);
            lo[j] = lo[j].min(delta);
            hi[j] = hi[j].max(delta);
            joined.push(j);
        } else {
            seeds.push(delta);
            let mut s = CompensatedSum::default();
            s.add(delta);
            sums.push(s);
            counts.push(1);
            lo.push(delta);
            hi.push(delta);
            joined.push(seeds.len() - 1);
        }
    }

    // Replace representatives by cluster means. Clusters whose members are all
    // equal keep that value exactly. Equal means are merged so that the
    // representatives stay pairwise distinct.
    let mut model = ClusterModel {
        epsilon,
        representatives: Vec::new(),
        counts: Vec::new(),
        sums: Vec::new(),
        seeds: Vec::new(),
    };
    let mut merged_sums: Vec<CompensatedSum> = Vec::new();
    for j in 0..seeds.len() {
        let h = if lo[j] == hi[j] {
            lo[j]
        } else {
            sums[j].value() / counts[j] as f64
        };
        match model.representatives.iter().position(|&r| r == h) {
            Some(k) => {
                model.counts[k] += counts[j];
                merged_sums[k].add(sums[j].sum);
                merged_sums[k].add(sums[j].comp);
            }
            None => {
                model.representatives.push(h);
                model.counts.push(counts[j]);
                model.seeds.push(seeds[j]);
                merged_sums.push(sums[j]);
            }
        }
    }
    model.sums = merged_sums.iter().map(CompensatedSum::value).collect();
    ClusterPass { model, joined }
}

/// `Some(mean)` when the series spread `max - min` is within `tolerance`.
pub fn is_constant_output(values: &[f64], tolerance: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    if hi - lo <= tolerance {
        let mut s = CompensatedSum::default();
        values.iter().for_each(|&v| s.add(v));
        Some(s.value() / values.len() as f64)
    } else {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum NodeDiscretization {
    /// Near-constant node: replaced by its mean, no clustering.
    Constant {
        value: f64,
    },
    Clustered {
        model: ClusterModel,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HiddenNodeModel {
    pub hidden: usize,
    pub model: NodeDiscretization,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub factor: f64,
    pub floor: f64,
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        EpsilonSchedule {
            start: 0.5,
            factor: 0.5,
            floor: 1e-3,
        }
    }
}

impl EpsilonSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.start > 0.0 && self.start < 1.0) {
            return Err(Error::Config("epsilon start must lie in (0, 1)".into()));
        }
        if !(self.factor > 0.0 && self.factor < 1.0) {
            return Err(Error::Config("epsilon factor must lie in (0, 1)".into()));
        }
        if !(self.floor > 0.0) {
            return Err(Error::Config("epsilon floor must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretizedNetwork {
    pub network: Network,
    /// One entry per active hidden node, ascending by node index.
    pub models: Vec<HiddenNodeModel>,
    pub epsilon: f64,
    pub required_accuracy: f64,
    pub achieved_accuracy: f64,
    /// Number of clustering passes tried (ε values).
    pub attempts: usize,
}

impl DiscretizedNetwork {
    /// Hidden activations with every active node replaced by its discrete value.
    pub fn discretize_hidden(&self, hidden: &[f64]) -> Vec<f64> {
        let mut out = hidden.to_vec();
        for m in &self.models {
            out[m.hidden] = match &m.model {
                NodeDiscretization::Constant { value } => *value,
                NodeDiscretization::Clustered { model } => model.discretize(hidden[m.hidden]),
            };
        }
        out
    }

    /// Clustered nodes only (constant nodes contribute no attribute).
    pub fn clustered(&self) -> impl Iterator<Item = (usize, &ClusterModel)> {
        self.models.iter().filter_map(|m| match &m.model {
            NodeDiscretization::Clustered { model } => Some((m.hidden, model)),
            NodeDiscretization::Constant { .. } => None,
        })
    }

    /// Cluster codes of the clustered nodes for one pattern.
    pub fn codes(&self, hidden: &[f64]) -> Vec<usize> {
        self.clustered()
            .map(|(j, model)| model.assign(hidden[j]))
            .collect()
    }

    /// Network class for a vector of cluster codes, constants filled in.
    pub fn class_of_codes(&self, codes: &[usize]) -> usize {
        let mut hidden = vec![0.0; self.network.hidden_count()];
        let mut next = codes.iter();
        for m in &self.models {
            hidden[m.hidden] = match &m.model {
                NodeDiscretization::Constant { value } => *value,
                NodeDiscretization::Clustered { model } => {
                    model.representatives[*next.next().expect("one code per clustered node")]
                }
            };
        }
        classify(&self.network.output_from_hidden(&hidden))
    }

    pub fn accuracy(&self, ds: &Dataset) -> Result<f64> {
        discretized_accuracy(&self.network, &self.models, ds)
    }
}

fn discretized_accuracy(net: &Network, models: &[HiddenNodeModel], ds: &Dataset) -> Result<f64> {
    if ds.is_empty() {
        return Err(Error::NoPatterns);
    }
    let mut correct = 0;
    for p in &ds.patterns {
        let mut hidden = net.forward(&p.normalized)?.hidden;
        for m in models {
            hidden[m.hidden] = match &m.model {
                NodeDiscretization::Constant { value } => *value,
                NodeDiscretization::Clustered { model } => model.discretize(hidden[m.hidden]),
            };
        }
        if classify(&net.output_from_hidden(&hidden)) == p.class_index {
            correct += 1;
        }
    }
    Ok(correct as f64 / ds.len() as f64)
}

/// Discretizes every active hidden node, shrinking ε until the discretized
/// network reaches `required_accuracy` on `train`.
pub fn discretize_network(
    net: &Network,
    train: &Dataset,
    required_accuracy: f64,
    schedule: &EpsilonSchedule,
    constant_tolerance: f64,
) -> Result<DiscretizedNetwork> {
    schedule.validate()?;
    if net.active_hidden_count() == 0 {
        return Err(Error::NoActiveHidden);
    }
    let series = net.hidden_activations(train)?;
    let mut epsilon = schedule.start;
    let mut best: Option<DiscretizedNetwork> = None;
    let mut attempts = 0;
    loop {
        attempts += 1;
        let models: Vec<HiddenNodeModel> = net
            .active_hidden()
            .map(|j| HiddenNodeModel {
                hidden: j,
                model: match is_constant_output(&series[j], constant_tolerance) {
                    Some(value) => NodeDiscretization::Constant { value },
                    None => NodeDiscretization::Clustered {
                        model: cluster_activations(&series[j], epsilon),
                    },
                },
            })
            .collect();
        let achieved = discretized_accuracy(net, &models, train)?;
        let candidate = DiscretizedNetwork {
            network: net.clone(),
            models,
            epsilon,
            required_accuracy,
            achieved_accuracy: achieved,
            attempts,
        };
        if achieved + 1e-12 >= required_accuracy {
            return Ok(candidate);
        }
        if best.as_ref().is_none_or(|b| achieved > b.achieved_accuracy) {
            best = Some(candidate);
        }
        let next = epsilon * schedule.factor;
        if next < schedule.floor {
            let best = best.expect("at least one attempt");
            return Err(Error::EpsilonExhausted {
                epsilon: next,
                floor: schedule.floor,
                best_accuracy: best.achieved_accuracy,
                required: required_accuracy,
                best: Box::new(best),
            });
        }
        epsilon = next;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_is_one_cluster() {
        let m = cluster_activations(&[0.3; 7], 0.1);
        assert_eq!(m.representatives, vec![0.3]);
        assert_eq!(m.counts, vec![7]);
    }

    #[test]
    fn hand_trace() {
        let m = cluster_activations(&[0.1, 0.15, 0.9], 0.2);
        assert_eq!(m.counts, vec![2, 1]);
        assert!((m.representatives[0] - 0.125).abs() < 1e-15);
        assert_eq!(m.representatives[1], 0.9);
    }

    #[test]
    fn assignment_examples() {
        let m = cluster_activations(&[0.1, 0.15, 0.9], 0.2);
        assert_eq!(m.assign(0.5), 0);
        assert_eq!(m.assign(0.9), 1);
        let sym = ClusterModel {
            epsilon: 0.5,
            representatives: vec![-1.0, 1.0],
            counts: vec![1, 1],
            sums: vec![-1.0, 1.0],
            seeds: vec![-1.0, 1.0],
        };
        assert_eq!(sym.assign(0.0), 0);
    }

    #[test]
    fn constant_detection() {
        assert_eq!(is_constant_output(&[0.99; 5], 0.02), Some(0.99));
        assert_eq!(is_constant_output(&[-0.9, 0.0, 0.9], 0.02), None);
        let vals = [0.980, 0.985, 0.992, 0.987];
        let mean = vals.iter().sum::<f64>() / 4.0;
        let got = is_constant_output(&vals, 0.02).unwrap();
        assert!((got - mean).abs() < 1e-15);
    }

    #[test]
    fn joins_use_seed_not_running_mean() {
        // 0.0 seeds; 0.2 joins (mean would become 0.1); 0.35 is 0.35 from the
        // seed and must open a new cluster even though it is within 0.25 of 0.1
        let pass = cluster_pass(&[0.0, 0.2, 0.35], 0.25);
        assert_eq!(pass.joined, vec![0, 0, 1]);
    }
}
