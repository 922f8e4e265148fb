use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::clusterer::EpsilonSchedule;
use crate::dataset::{self, Dataset, DatasetSchema};
use crate::error::{Error, Result};
use crate::trainer::{ConstructiveSpec, PruneSpec};

pub const CONFIG_FORMAT: &str = "reann-config/1";

/// Where the patterns come from: a bundled name, or a data file plus schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetRef {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    /// Defaults to `<path without extension>.schema.toml`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema: Option<PathBuf>,
}

impl DatasetRef {
    pub fn bundled(name: &str) -> Self {
        DatasetRef {
            name: Some(name.to_string()),
            path: None,
            schema: None,
        }
    }

    /// A bundled name when one matches, otherwise a file path.
    pub fn parse(arg: &str) -> Self {
        if dataset::bundled_names().contains(&arg) {
            DatasetRef::bundled(arg)
        } else {
            DatasetRef {
                name: None,
                path: Some(PathBuf::from(arg)),
                schema: None,
            }
        }
    }

    pub fn load(&self) -> Result<Dataset> {
        match (&self.path, &self.name) {
            (Some(path), _) => {
                let schema_path = self.schema.clone().unwrap_or_else(|| sibling_schema(path));
                let schema = dataset::load_schema_file(&schema_path)?;
                dataset::load_dataset_file(path, &schema)
            }
            (None, Some(name)) => dataset::bundled(name),
            (None, None) => Err(Error::Config("dataset needs a name or a path".into())),
        }
    }

    pub fn label(&self) -> String {
        match (&self.name, &self.path) {
            (Some(n), _) => n.clone(),
            (None, Some(p)) => p.display().to_string(),
            (None, None) => "?".into(),
        }
    }
}

fn sibling_schema(path: &Path) -> PathBuf {
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    path.with_file_name(format!("{stem}.schema.toml"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub learning_rate: f64,
    pub weight_init_range: (f64, f64),
    pub weight_decay: f64,
}

impl Default for NetworkSection {
    fn default() -> Self {
        NetworkSection {
            learning_rate: 0.5,
            weight_init_range: (-1.0, 1.0),
            weight_decay: 1e-4,
        }
    }
}

/// How the accuracy the discretized network must keep is derived.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum RequiredAccuracy {
    /// Pruned network training accuracy minus `drop`.
    Network {
        drop: f64,
    },
    Fixed {
        value: f64,
    },
}

impl Default for RequiredAccuracy {
    fn default() -> Self {
        RequiredAccuracy::Network { drop: 0.0 }
    }
}

impl RequiredAccuracy {
    pub fn resolve(&self, network_accuracy: f64) -> f64 {
        match *self {
            RequiredAccuracy::Network { drop } => network_accuracy - drop,
            RequiredAccuracy::Fixed { value } => value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusteringSection {
    pub epsilon: EpsilonSchedule,
    pub required: RequiredAccuracy,
    /// Activation spread below which a hidden node counts as constant.
    pub constant_tolerance: f64,
}

impl Default for ClusteringSection {
    fn default() -> Self {
        ClusteringSection {
            epsilon: EpsilonSchedule::default(),
            required: RequiredAccuracy::default(),
            constant_tolerance: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RexSection {
    /// Minimum correct coverage of a final rule. `None`: 2, or 1 below 25 patterns.
    pub noise_floor: Option<usize>,
    pub bins_per_attribute: usize,
    /// Largest training-accuracy drop of one simplification round.
    pub round_tolerance: f64,
    /// Rule accuracy may fall this far below the discretized network's requirement.
    pub allowance: f64,
    pub max_rounds: usize,
}

impl Default for RexSection {
    fn default() -> Self {
        RexSection {
            noise_floor: None,
            bins_per_attribute: 3,
            round_tolerance: 0.01,
            allowance: 0.02,
            max_rounds: 64,
        }
    }
}

impl RexSection {
    pub fn noise_floor_for(&self, patterns: usize) -> usize {
        self.noise_floor
            .unwrap_or(if patterns < 25 { 1 } else { 2 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_format")]
    pub format: String,
    pub dataset: DatasetRef,
    /// Overrides the schema's positional split.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train_count: Option<usize>,
    #[serde(default)]
    pub network: NetworkSection,
    #[serde(default)]
    pub constructive: ConstructiveSpec,
    #[serde(default)]
    pub prune: PruneSpec,
    #[serde(default)]
    pub clustering: ClusteringSection,
    #[serde(default)]
    pub rex: RexSection,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub seed: u64,
    /// Explicit seeds; otherwise `seed..seed + runs`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seeds: Option<Vec<u64>>,
}

fn default_format() -> String {
    CONFIG_FORMAT.to_string()
}

fn default_runs() -> usize {
    10
}

const BUNDLED_CONFIGS: &[(&str, &str)] = &[
    (
        "breast-cancer",
        include_str!("../../configs/breast-cancer.toml"),
    ),
    ("iris", include_str!("../../configs/iris.toml")),
    ("diabetes", include_str!("../../configs/diabetes.toml")),
    ("season", include_str!("../../configs/season.toml")),
];

impl ExperimentConfig {
    /// Defaults for a dataset without a tuned config.
    pub fn for_dataset(dataset: DatasetRef) -> Self {
        ExperimentConfig {
            format: default_format(),
            dataset,
            train_count: None,
            network: NetworkSection::default(),
            constructive: ConstructiveSpec::default(),
            prune: PruneSpec::default(),
            clustering: ClusteringSection::default(),
            rex: RexSection::default(),
            runs: default_runs(),
            seed: 0,
            seeds: None,
        }
    }

    /// The shipped config for a bundled dataset.
    pub fn bundled(name: &str) -> Result<Self> {
        let (_, text) = BUNDLED_CONFIGS
            .iter()
            .find(|(n, _)| *n == name)
            .ok_or_else(|| Error::Config(format!("no bundled config for {name:?}")))?;
        Self::from_toml(text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml(&text)?;
        // relative data paths are relative to the config file
        if let Some(dir) = path.parent() {
            for p in [&mut cfg.dataset.path, &mut cfg.dataset.schema]
                .into_iter()
                .flatten()
            {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.format != CONFIG_FORMAT {
            return Err(Error::Config(format!(
                "expected format {CONFIG_FORMAT}, found {}",
                self.format
            )));
        }
        if self.dataset.name.is_none() && self.dataset.path.is_none() {
            return Err(Error::Config("dataset needs a name or a path".into()));
        }
        self.constructive.validate()?;
        self.prune.validate()?;
        self.clustering.epsilon.validate()?;
        let lr = self.network.learning_rate;
        if !(0.1..=1.0).contains(&lr) {
            return Err(Error::Config(format!(
                "learning_rate {lr} outside [0.1, 1.0]"
            )));
        }
        let (lo, hi) = self.network.weight_init_range;
        if !(-1.0 <= lo && lo < hi && hi <= 1.0) {
            return Err(Error::Config(
                "weight_init_range must lie within [-1, 1]".into(),
            ));
        }
        if !(self.network.weight_decay >= 0.0) {
            return Err(Error::Config("weight_decay must be >= 0".into()));
        }
        if self.rex.bins_per_attribute < 2 {
            return Err(Error::Config("bins_per_attribute must be >= 2".into()));
        }
        if !(self.rex.round_tolerance >= 0.0 && self.rex.allowance >= 0.0) {
            return Err(Error::Config("rule loop tolerances must be >= 0".into()));
        }
        if self.runs == 0 {
            return Err(Error::Config("runs must be >= 1".into()));
        }
        if let Some(seeds) = &self.seeds {
            if seeds.len() != self.runs {
                return Err(Error::Config(format!(
                    "{} seeds given for {} runs",
                    seeds.len(),
                    self.runs
                )));
            }
        }
        Ok(())
    }

    pub fn seed_list(&self) -> Vec<u64> {
        self.seeds
            .clone()
            .unwrap_or_else(|| (0..self.runs as u64).map(|k| self.seed + k).collect())
    }

    /// Replaces the seed list by `base..base + runs`.
    pub fn with_seeds(mut self, base: u64, runs: usize) -> Self {
        self.seed = base;
        self.runs = runs;
        self.seeds = None;
        self
    }

    /// Loads the dataset and splits it into (train, test). Without a split,
    /// both are the whole set. The schema's class names are kept.
    pub fn load_split(&self) -> Result<(Dataset, Dataset, DatasetSchema)> {
        let ds = self.dataset.load()?;
        let schema = ds.schema.clone();
        let (train, test) = match self.train_count.or(schema.train_count) {
            Some(n) => ds.split(n)?,
            None => (ds.clone(), ds),
        };
        let map = crate::dataset::NormalizationMap::fit(&train);
        Ok((
            train.normalize_with(&map),
            test.normalize_with(&map),
            schema,
        ))
    }
}
