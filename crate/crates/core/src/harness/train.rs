use crate::associativity::AssociativityMap;
use crate::data::{
    batches, load_iris_csv, load_mnist_dir, make_binary_pair, DataPaths, Dataset, RawData,
    SplitSpec,
};
use crate::error::{Error, Result};
use crate::network::{bce_loss, classify, ForwardTrace, Network};
use crate::optimizer::{make_directions, AdamState};

use super::config::{DatasetKind, ExperimentConfig, HIDDEN_LAYERS};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_accuracy: f64,
    pub test_accuracy: f64,
    /// Mean BCE on the training split. Diagnostic only for STDP runs.
    pub mean_train_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub network: Network,
    pub assoc: AssociativityMap,
    /// Accuracy of the untrained network (epoch 0).
    pub initial: EpochMetrics,
    /// One entry per completed epoch, starting at epoch 1.
    pub metrics: Vec<EpochMetrics>,
}

impl TrainOutcome {
    pub fn last(&self) -> &EpochMetrics {
        self.metrics.last().unwrap_or(&self.initial)
    }
}

/// Loads the configured pair from disk.
pub fn load_pair(config: &ExperimentConfig, paths: &DataPaths) -> Result<(Dataset, Dataset)> {
    config.validate()?;
    let raw = match config.dataset {
        DatasetKind::Mnist => {
            let dir = paths
                .mnist_dir
                .as_deref()
                .ok_or_else(|| Error::Config("MNIST directory not given".into()))?;
            RawData::Mnist(load_mnist_dir(dir)?)
        }
        DatasetKind::Iris => {
            let file = paths
                .iris_file
                .as_deref()
                .ok_or_else(|| Error::Config("IRIS file not given".into()))?;
            RawData::Iris(load_iris_csv(file)?)
        }
    };
    let split = SplitSpec {
        train_fraction: config.train_fraction,
        seed: config.seeds.split,
    };
    make_binary_pair(&raw, config.pair.0, config.pair.1, split)
}

/// Accuracy and mean BCE of `net` over `ds`.
pub fn evaluate(net: &Network, ds: &Dataset) -> Result<(f64, f64)> {
    if ds.is_empty() {
        return Err(Error::EmptyDataset("nothing to evaluate".into()));
    }
    let mut correct = 0usize;
    let mut loss = 0.0;
    for i in 0..ds.len() {
        let (x, y) = ds.sample(i);
        let p = net.output(x)?;
        if classify(p) == y {
            correct += 1;
        }
        loss += bce_loss(p, y);
    }
    let n = ds.len() as f64;
    Ok((correct as f64 / n, loss / n))
}

fn measure(net: &Network, epoch: usize, train: &Dataset, test: &Dataset) -> Result<EpochMetrics> {
    let (train_accuracy, mean_train_loss) = evaluate(net, train)?;
    let (test_accuracy, _) = evaluate(net, test)?;
    Ok(EpochMetrics {
        epoch,
        train_accuracy,
        test_accuracy,
        mean_train_loss,
    })
}

fn epoch_seed(shuffle_seed: u64, epoch: usize) -> u64 {
    shuffle_seed ^ (epoch as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)
}

pub fn train(config: &ExperimentConfig, train: &Dataset, test: &Dataset) -> Result<TrainOutcome> {
    train_with(config, train, test, |_| {})
}

/// Trains with the configured method, calling `on_epoch` after every epoch.
pub fn train_with(
    config: &ExperimentConfig,
    train: &Dataset,
    test: &Dataset,
    mut on_epoch: impl FnMut(&EpochMetrics),
) -> Result<TrainOutcome> {
    config.validate()?;
    if train.is_empty() || test.is_empty() {
        return Err(Error::EmptyDataset(
            "train and test splits must be non-empty".into(),
        ));
    }
    if train.dim() != test.dim() {
        return Err(Error::Shape("train and test feature widths differ".into()));
    }
    let mut dims = vec![train.dim()];
    dims.extend(HIDDEN_LAYERS);
    dims.push(1);

    let mut net = Network::init(&dims, config.seeds.init)?;
    let assoc = AssociativityMap::assign(&dims, config.seeds.assoc)?;
    let mut adam = AdamState::new(config.adam, &net);
    let source = config.method.update_source();

    let initial = measure(&net, 0, train, test)?;
    let mut metrics = Vec::with_capacity(config.epochs);
    let mut traces: Vec<ForwardTrace> = Vec::with_capacity(config.batch_size);
    let mut labels = Vec::with_capacity(config.batch_size);
    for epoch in 1..=config.epochs {
        let order = batches(
            train.len(),
            config.batch_size,
            epoch_seed(config.seeds.shuffle, epoch),
        );
        for (batch, idx) in order.iter().enumerate() {
            traces.clear();
            labels.clear();
            for &i in idx {
                let (x, y) = train.sample(i);
                traces.push(net.forward(x)?);
                labels.push(y);
            }
            let directions = make_directions(source, &net, &traces, &labels, &assoc, &config.rule)?;
            adam.step(&mut net, &directions).map_err(|e| match e {
                Error::Numerical(_) => Error::NonFiniteWeights { epoch, batch },
                other => other,
            })?;
            if !net.all_finite() {
                return Err(Error::NonFiniteWeights { epoch, batch });
            }
        }
        let m = measure(&net, epoch, train, test)?;
        on_epoch(&m);
        metrics.push(m);
    }
    Ok(TrainOutcome {
        network: net,
        assoc,
        initial,
        metrics,
    })
}
