//! Three-layer feedforward network: tanh hidden layer, logistic outputs, one
//! bias per hidden and output node, and masks on every non-bias connection.
//!
//! Training is per-pattern gradient descent on squared error
//! `E = 1/2 * sum_k (o_k - t_k)^2` with an optional weight-decay term `λ·w`
//! added to the gradient of every active connection weight.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

pub const CHECKPOINT_FORMAT: &str = "reann-network/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub input_count: usize,
    pub hidden_count: usize,
    pub output_count: usize,
    pub learning_rate: f64,
    pub weight_init_range: (f64, f64),
    pub weight_decay: f64,
    pub seed: u64,
}

impl NetworkConfig {
    pub fn new(input_count: usize, hidden_count: usize, output_count: usize, seed: u64) -> Self {
        NetworkConfig {
            input_count,
            hidden_count,
            output_count,
            learning_rate: 0.5,
            weight_init_range: (-1.0, 1.0),
            weight_decay: 1e-4,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_count == 0 || self.output_count == 0 {
            return Err(Error::Config("network needs inputs and outputs".into()));
        }
        if self.hidden_count < 1 {
            return Err(Error::Config("hidden_count must be at least 1".into()));
        }
        if !(0.1..=1.0).contains(&self.learning_rate) {
            return Err(Error::Config(format!(
                "learning_rate {} outside [0.1, 1.0]",
                self.learning_rate
            )));
        }
        let (lo, hi) = self.weight_init_range;
        if !(lo <= hi && lo >= -1.0 && hi <= 1.0) {
            return Err(Error::Config(format!(
                "weight_init_range ({lo}, {hi}) not within [-1, 1]"
            )));
        }
        if !(self.weight_decay >= 0.0) {
            return Err(Error::Config("weight_decay must be nonnegative".into()));
        }
        Ok(())
    }
}

/// A non-bias connection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "layer", rename_all = "kebab-case")]
pub enum Connection {
    InputHidden { input: usize, hidden: usize },
    HiddenOutput { hidden: usize, output: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch_index: usize,
    pub mean_squared_error: f64,
    pub training_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Activations {
    pub hidden: Vec<f64>,
    pub output: Vec<f64>,
}

/// Partial derivatives of the per-pattern error (without weight decay).
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub input_hidden: Vec<Vec<f64>>,
    pub hidden_output: Vec<Vec<f64>>,
    pub hidden_bias: Vec<f64>,
    pub output_bias: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub learning_rate: f64,
    pub weight_decay: f64,
    /// `input_hidden[j][i]`: weight from input `i` to hidden node `j`.
    pub input_hidden: Vec<Vec<f64>>,
    pub input_hidden_mask: Vec<Vec<bool>>,
    /// `hidden_output[k][j]`: weight from hidden node `j` to output `k`.
    pub hidden_output: Vec<Vec<f64>>,
    pub hidden_output_mask: Vec<Vec<bool>>,
    pub hidden_bias: Vec<f64>,
    pub output_bias: Vec<f64>,
    pub input_active: Vec<bool>,
    pub hidden_active: Vec<bool>,
    /// Epochs trained so far.
    pub epochs: usize,
}

pub fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Index of the largest output; the lowest index wins ties.
pub fn classify(output: &[f64]) -> usize {
    let mut best = 0;
    for (k, &o) in output.iter().enumerate() {
        if o > output[best] {
            best = k;
        }
    }
    best
}

/// Seeded initialization: every weight and bias uniform in the configured range.
pub fn init_network(cfg: &NetworkConfig) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    Network::random(cfg, &mut rng)
}

fn draw(rng: &mut impl Rng, (lo, hi): (f64, f64)) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.gen_range(lo..=hi)
    }
}

impl Network {
    pub fn random(cfg: &NetworkConfig, rng: &mut impl Rng) -> Network {
        let range = cfg.weight_init_range;
        let mut net = Network {
            learning_rate: cfg.learning_rate,
            weight_decay: cfg.weight_decay,
            input_hidden: Vec::new(),
            input_hidden_mask: Vec::new(),
            hidden_output: (0..cfg.output_count).map(|_| Vec::new()).collect(),
            hidden_output_mask: (0..cfg.output_count).map(|_| Vec::new()).collect(),
            hidden_bias: Vec::new(),
            output_bias: Vec::new(),
            input_active: vec![true; cfg.input_count],
            hidden_active: Vec::new(),
            epochs: 0,
        };
        for _ in 0..cfg.hidden_count {
            net.push_hidden(rng, range);
        }
        net.output_bias = (0..cfg.output_count).map(|_| draw(rng, range)).collect();
        net
    }

    fn push_hidden(&mut self, rng: &mut impl Rng, range: (f64, f64)) {
        let n_in = self.input_count();
        self.input_hidden
            .push((0..n_in).map(|_| draw(rng, range)).collect());
        self.input_hidden_mask.push(self.input_active.to_vec());
        self.hidden_bias.push(draw(rng, range));
        for k in 0..self.output_count() {
            self.hidden_output[k].push(draw(rng, range));
            self.hidden_output_mask[k].push(true);
        }
        self.hidden_active.push(true);
    }

    /// Adds one hidden node with fresh random incident weights; existing weights
    /// are retained. Connections from masked inputs start masked.
    pub fn add_hidden_node(&mut self, rng: &mut impl Rng, range: (f64, f64)) {
        self.push_hidden(rng, range);
    }

    pub fn input_count(&self) -> usize {
        self.input_active.len()
    }

    pub fn hidden_count(&self) -> usize {
        self.hidden_active.len()
    }

    pub fn output_count(&self) -> usize {
        self.hidden_output.len()
    }

    pub fn active_hidden(&self) -> impl Iterator<Item = usize> + '_ {
        self.hidden_active
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(j, _)| j)
    }

    pub fn active_inputs(&self) -> impl Iterator<Item = usize> + '_ {
        self.input_active
            .iter()
            .enumerate()
            .filter(|(_, &a)| a)
            .map(|(i, _)| i)
    }

    pub fn active_input_count(&self) -> usize {
        self.active_inputs().count()
    }

    pub fn active_hidden_count(&self) -> usize {
        self.active_hidden().count()
    }

    /// Active input, hidden and output nodes. Outputs are never masked.
    pub fn node_count(&self) -> usize {
        self.active_input_count() + self.active_hidden_count() + self.output_count()
    }

    /// Active non-bias connections.
    pub fn connection_count(&self) -> usize {
        self.active_connections().len()
    }

    pub fn layer_triple(&self) -> (usize, usize, usize) {
        (
            self.active_input_count(),
            self.active_hidden_count(),
            self.output_count(),
        )
    }

    pub fn is_active(&self, c: Connection) -> bool {
        match c {
            Connection::InputHidden { input, hidden } => self.input_hidden_mask[hidden][input],
            Connection::HiddenOutput { hidden, output } => self.hidden_output_mask[output][hidden],
        }
    }

    pub fn weight(&self, c: Connection) -> f64 {
        match c {
            Connection::InputHidden { input, hidden } => self.input_hidden[hidden][input],
            Connection::HiddenOutput { hidden, output } => self.hidden_output[output][hidden],
        }
    }

    pub fn set_weight(&mut self, c: Connection, w: f64) {
        match c {
            Connection::InputHidden { input, hidden } => self.input_hidden[hidden][input] = w,
            Connection::HiddenOutput { hidden, output } => self.hidden_output[output][hidden] = w,
        }
    }

    /// All active connections, input-hidden first, each in index order.
    pub fn active_connections(&self) -> Vec<Connection> {
        let mut out = Vec::new();
        for (hidden, row) in self.input_hidden_mask.iter().enumerate() {
            for (input, &m) in row.iter().enumerate() {
                if m {
                    out.push(Connection::InputHidden { input, hidden });
                }
            }
        }
        for hidden in 0..self.hidden_count() {
            for output in 0..self.output_count() {
                if self.hidden_output_mask[output][hidden] {
                    out.push(Connection::HiddenOutput { hidden, output });
                }
            }
        }
        out
    }

    pub fn set_mask(&mut self, c: Connection, active: bool) {
        match c {
            Connection::InputHidden { input, hidden } => {
                self.input_hidden_mask[hidden][input] = active
            }
            Connection::HiddenOutput { hidden, output } => {
                self.hidden_output_mask[output][hidden] = active
            }
        }
    }

    /// Masks a connection and then any node left without a role.
    pub fn mask(&mut self, c: Connection) {
        self.set_mask(c, false);
        self.refresh_node_masks();
    }

    /// Node masks follow connection masks: a hidden node with no active outgoing
    /// connection is masked along with its incoming connections, a hidden node
    /// with no active connection at all is masked, and an input with no active
    /// outgoing connection is masked. A hidden node that lost only its inputs
    /// still feeds the outputs a constant and stays active.
    pub fn refresh_node_masks(&mut self) {
        for j in 0..self.hidden_count() {
            let out_active = (0..self.output_count()).any(|k| self.hidden_output_mask[k][j]);
            if !out_active {
                self.hidden_active[j] = false;
                self.input_hidden_mask[j]
                    .iter_mut()
                    .for_each(|m| *m = false);
            }
        }
        for i in 0..self.input_count() {
            let used = (0..self.hidden_count()).any(|j| self.input_hidden_mask[j][i]);
            self.input_active[i] = used;
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.input_count() {
            return Err(Error::Dimension {
                expected: self.input_count(),
                actual: x.len(),
            });
        }
        Ok(())
    }

    fn hidden_into(&self, x: &[f64], hidden: &mut [f64]) {
        for (j, h) in hidden.iter_mut().enumerate() {
            *h = if self.hidden_active[j] {
                let mut s = self.hidden_bias[j];
                for (i, &xi) in x.iter().enumerate() {
                    if self.input_hidden_mask[j][i] {
                        s += self.input_hidden[j][i] * xi;
                    }
                }
                s.tanh()
            } else {
                0.0
            };
        }
    }

    fn output_into(&self, hidden: &[f64], output: &mut [f64]) {
        for (k, o) in output.iter_mut().enumerate() {
            let mut s = self.output_bias[k];
            for (j, &h) in hidden.iter().enumerate() {
                if self.hidden_active[j] && self.hidden_output_mask[k][j] {
                    s += self.hidden_output[k][j] * h;
                }
            }
            *o = logistic(s);
        }
    }

    pub fn forward(&self, x: &[f64]) -> Result<Activations> {
        self.check_input(x)?;
        let mut hidden = vec![0.0; self.hidden_count()];
        let mut output = vec![0.0; self.output_count()];
        self.hidden_into(x, &mut hidden);
        self.output_into(&hidden, &mut output);
        Ok(Activations { hidden, output })
    }

    /// Output layer evaluated on given hidden activations (e.g. discretized ones).
    pub fn output_from_hidden(&self, hidden: &[f64]) -> Vec<f64> {
        let mut output = vec![0.0; self.output_count()];
        self.output_into(hidden, &mut output);
        output
    }

    pub fn predict(&self, x: &[f64]) -> Result<usize> {
        Ok(classify(&self.forward(x)?.output))
    }

    /// Per-pattern error `1/2 * sum_k (o_k - t_k)^2`.
    pub fn loss(&self, x: &[f64], target: &[f64]) -> Result<f64> {
        let a = self.forward(x)?;
        Ok(0.5
            * a.output
                .iter()
                .zip(target)
                .map(|(o, t)| (o - t) * (o - t))
                .sum::<f64>())
    }

    /// Backpropagated gradient of [`Network::loss`]; masked entries are zero.
    pub fn gradients(&self, x: &[f64], target: &[f64]) -> Result<Gradients> {
        let a = self.forward(x)?;
        let (n_h, n_o) = (self.hidden_count(), self.output_count());
        let delta_o: Vec<f64> = a
            .output
            .iter()
            .zip(target)
            .map(|(&o, &t)| (o - t) * o * (1.0 - o))
            .collect();
        let delta_h: Vec<f64> = (0..n_h)
            .map(|j| {
                if !self.hidden_active[j] {
                    return 0.0;
                }
                let back: f64 = (0..n_o)
                    .filter(|&k| self.hidden_output_mask[k][j])
                    .map(|k| self.hidden_output[k][j] * delta_o[k])
                    .sum();
                (1.0 - a.hidden[j] * a.hidden[j]) * back
            })
            .collect();
        let hidden_output = (0..n_o)
            .map(|k| {
                (0..n_h)
                    .map(|j| {
                        if self.hidden_active[j] && self.hidden_output_mask[k][j] {
                            delta_o[k] * a.hidden[j]
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let input_hidden = (0..n_h)
            .map(|j| {
                x.iter()
                    .enumerate()
                    .map(|(i, &xi)| {
                        if self.hidden_active[j] && self.input_hidden_mask[j][i] {
                            delta_h[j] * xi
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        Ok(Gradients {
            input_hidden,
            hidden_output,
            hidden_bias: delta_h,
            output_bias: delta_o,
        })
    }

    /// Applies one gradient-descent step for a single pattern.
    pub fn step(&mut self, x: &[f64], target: &[f64]) -> Result<()> {
        let g = self.gradients(x, target)?;
        let (eta, lambda) = (self.learning_rate, self.weight_decay);
        for k in 0..self.output_count() {
            for j in 0..self.hidden_count() {
                if self.hidden_active[j] && self.hidden_output_mask[k][j] {
                    let w = self.hidden_output[k][j];
                    self.hidden_output[k][j] = w - eta * (g.hidden_output[k][j] + lambda * w);
                }
            }
            self.output_bias[k] -= eta * g.output_bias[k];
        }
        for j in 0..self.hidden_count() {
            if !self.hidden_active[j] {
                continue;
            }
            for i in 0..self.input_count() {
                if self.input_hidden_mask[j][i] {
                    let w = self.input_hidden[j][i];
                    self.input_hidden[j][i] = w - eta * (g.input_hidden[j][i] + lambda * w);
                }
            }
            self.hidden_bias[j] -= eta * g.hidden_bias[j];
        }
        Ok(())
    }

    /// One pass of per-pattern updates in dataset order, then post-epoch stats.
    pub fn train_epoch(&mut self, train: &Dataset) -> Result<EpochStats> {
        if train.is_empty() {
            return Err(Error::NoPatterns);
        }
        for (i, p) in train.patterns.iter().enumerate() {
            self.step(&p.normalized, &train.target(i))?;
        }
        self.epochs += 1;
        let (mse, acc) = self.evaluate(train)?;
        if !mse.is_finite() || !self.weights_finite() {
            return Err(Error::Divergence { epoch: self.epochs });
        }
        Ok(EpochStats {
            epoch_index: self.epochs,
            mean_squared_error: mse,
            training_accuracy: acc,
        })
    }

    fn weights_finite(&self) -> bool {
        self.input_hidden.iter().flatten().all(|w| w.is_finite())
            && self.hidden_output.iter().flatten().all(|w| w.is_finite())
            && self.hidden_bias.iter().all(|w| w.is_finite())
            && self.output_bias.iter().all(|w| w.is_finite())
    }

    /// Mean squared error (per output) and accuracy over `ds`.
    pub fn evaluate(&self, ds: &Dataset) -> Result<(f64, f64)> {
        if ds.is_empty() {
            return Err(Error::NoPatterns);
        }
        let mut hidden = vec![0.0; self.hidden_count()];
        let mut output = vec![0.0; self.output_count()];
        let mut sq = 0.0;
        let mut correct = 0usize;
        for p in &ds.patterns {
            self.check_input(&p.normalized)?;
            self.hidden_into(&p.normalized, &mut hidden);
            self.output_into(&hidden, &mut output);
            for (k, &o) in output.iter().enumerate() {
                let t = if k == p.class_index { 1.0 } else { 0.0 };
                sq += (o - t) * (o - t);
            }
            if classify(&output) == p.class_index {
                correct += 1;
            }
        }
        let n = ds.len() as f64;
        Ok((sq / (n * self.output_count() as f64), correct as f64 / n))
    }

    pub fn accuracy(&self, ds: &Dataset) -> Result<f64> {
        Ok(self.evaluate(ds)?.1)
    }

    /// Activation series of every hidden node over `ds`, `[node][pattern]`.
    pub fn hidden_activations(&self, ds: &Dataset) -> Result<Vec<Vec<f64>>> {
        let mut series = vec![Vec::with_capacity(ds.len()); self.hidden_count()];
        let mut hidden = vec![0.0; self.hidden_count()];
        for p in &ds.patterns {
            self.check_input(&p.normalized)?;
            self.hidden_into(&p.normalized, &mut hidden);
            for (j, &h) in hidden.iter().enumerate() {
                series[j].push(h);
            }
        }
        Ok(series)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_json(path.as_ref(), &Checkpoint::new(self.clone()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Network> {
        let cp: Checkpoint = read_json(path.as_ref())?;
        cp.into_network()
    }
}

/// Versioned on-disk record of a network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub network: Network,
}

impl Checkpoint {
    pub fn new(network: Network) -> Self {
        Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            network,
        }
    }

    pub fn into_network(self) -> Result<Network> {
        if self.format != CHECKPOINT_FORMAT {
            return Err(Error::Format(format!(
                "expected {CHECKPOINT_FORMAT}, found {:?}",
                self.format
            )));
        }
        Ok(self.network)
    }
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Format(e.to_string()))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub(crate) fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}
