use std::fmt;
use std::str::FromStr;

use crate::attack::AttackConfig;
use crate::error::{Error, Result};
use crate::optimizer::{AdamConfig, UpdateSource};
use crate::rule::RuleParams;

/// Hidden layer widths shared by every experiment.
pub const HIDDEN_LAYERS: [usize; 2] = [32, 16];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    Mnist,
    Iris,
}

impl DatasetKind {
    pub fn num_classes(self) -> u8 {
        match self {
            DatasetKind::Mnist => 10,
            DatasetKind::Iris => 3,
        }
    }

    pub fn default_batch_size(self) -> usize {
        match self {
            DatasetKind::Mnist => 100,
            DatasetKind::Iris => 40,
        }
    }
}

impl fmt::Display for DatasetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DatasetKind::Mnist => "mnist",
            DatasetKind::Iris => "iris",
        })
    }
}

impl FromStr for DatasetKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "mnist" => Ok(DatasetKind::Mnist),
            "iris" => Ok(DatasetKind::Iris),
            _ => Err(Error::Config(format!("unknown dataset {s:?} (mnist|iris)"))),
        }
    }
}

/// Training method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Stdp,
    Bp,
}

impl Method {
    pub fn update_source(self) -> UpdateSource {
        match self {
            Method::Stdp => UpdateSource::StdpRule,
            Method::Bp => UpdateSource::Gradient,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Stdp => "stdp",
            Method::Bp => "bp",
        })
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "stdp" => Ok(Method::Stdp),
            "bp" => Ok(Method::Bp),
            _ => Err(Error::Config(format!("unknown method {s:?} (stdp|bp)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Seeds {
    /// Weight initialisation.
    pub init: u64,
    /// Placement of associativity signs.
    pub assoc: u64,
    /// Per-epoch batch order.
    pub shuffle: u64,
    /// IRIS train/test split.
    pub split: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetKind,
    pub pair: (u8, u8),
    pub method: Method,
    pub epochs: usize,
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub seeds: Seeds,
    pub rule: RuleParams,
    pub attack: AttackConfig,
    /// IRIS only; MNIST keeps its own split.
    pub train_fraction: f64,
}

impl ExperimentConfig {
    pub fn new(dataset: DatasetKind, pair: (u8, u8), method: Method) -> ExperimentConfig {
        ExperimentConfig {
            dataset,
            pair,
            method,
            epochs: 50,
            batch_size: dataset.default_batch_size(),
            adam: AdamConfig::default(),
            seeds: Seeds::default(),
            rule: RuleParams::default(),
            attack: AttackConfig::default(),
            train_fraction: 0.8,
        }
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.epochs = epochs;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    /// Pair label used in reports, e.g. `0v1`.
    pub fn pair_label(&self) -> String {
        format!("{}v{}", self.pair.0, self.pair.1)
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.pair;
        let n = self.dataset.num_classes();
        if a == b || a >= n || b >= n {
            return Err(Error::Config(format!(
                "pair {a},{b} invalid for {} (classes 0..{n}, distinct)",
                self.dataset
            )));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::Config(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        self.adam.validate()?;
        self.rule.validate()?;
        self.attack.validate()
    }
}
