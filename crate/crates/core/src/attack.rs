//! Fast gradient sign method against the BCE loss of a trained network.

use ndarray::{Array1, ArrayView1};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::network::{Label, Network};

#[derive(Debug, Clone, PartialEq)]
pub struct AttackConfig {
    pub epsilons: Vec<f64>,
}

impl Default for AttackConfig {
    fn default() -> Self {
        Self {
            epsilons: vec![4.0 / 255.0, 8.0 / 255.0, 12.0 / 255.0],
        }
    }
}

impl AttackConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epsilons.is_empty() {
            return Err(Error::Config("no attack strengths given".into()));
        }
        match self
            .epsilons
            .iter()
            .find(|e| !(e.is_finite() && (0.0..=1.0).contains(*e)))
        {
            Some(e) => Err(Error::Config(format!("attack strength {e} outside [0, 1]"))),
            None => Ok(()),
        }
    }
}

#[inline]
fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// `clamp(x + eps * sign(dL/dx), 0, 1)`; components with zero gradient are
/// left untouched.
pub fn fgsm(
    net: &Network,
    input: ArrayView1<'_, f64>,
    label: Label,
    eps: f64,
) -> Result<Array1<f64>> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::Config(format!(
            "attack strength must be >= 0, got {eps}"
        )));
    }
    let trace = net.forward(input)?;
    let grad = net.backprop_bce(&trace, label)?.input;
    Ok(Array1::from_iter(
        input
            .iter()
            .zip(&grad)
            .map(|(&x, &g)| (x + eps * sign(g)).clamp(0.0, 1.0)),
    ))
}

/// Accuracy under attack at one strength.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdversarialPoint {
    pub epsilon: f64,
    pub accuracy: f64,
}

/// Fraction of `ds` still classified correctly after an FGSM step, per
/// strength in `config`.
pub fn adversarial_accuracy(
    net: &Network,
    ds: &Dataset,
    config: &AttackConfig,
) -> Result<Vec<AdversarialPoint>> {
    config.validate()?;
    if ds.is_empty() {
        return Err(Error::EmptyDataset("cannot attack an empty dataset".into()));
    }
    config
        .epsilons
        .iter()
        .map(|&epsilon| {
            let mut correct = 0usize;
            for i in 0..ds.len() {
                let (x, y) = ds.sample(i);
                let adv = fgsm(net, x, y, epsilon)?;
                if net.predict(adv.view())? == y {
                    correct += 1;
                }
            }
            Ok(AdversarialPoint {
                epsilon,
                accuracy: correct as f64 / ds.len() as f64,
            })
        })
        .collect()
}
