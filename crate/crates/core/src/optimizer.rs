//! Adam, fed either with true BCE gradients or with negated STDP updates.

use ndarray::{Array2, Zip};

use crate::associativity::{accumulate_layer_update, AssociativityMap};
use crate::error::{Error, Result};
use crate::network::{ForwardTrace, Label, Network};
use crate::rule::RuleParams;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.lr.is_finite()
            && self.lr > 0.0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.eps.is_finite()
            && self.eps > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "invalid Adam hyperparameters {self:?}"
            )))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    m: Vec<Array2<f64>>,
    v: Vec<Array2<f64>>,
    t: u64,
}

impl AdamState {
    pub fn new(config: AdamConfig, net: &Network) -> AdamState {
        let zeros: Vec<_> = net
            .weights()
            .iter()
            .map(|w| Array2::zeros(w.dim()))
            .collect();
        AdamState {
            config,
            m: zeros.clone(),
            v: zeros,
            t: 0,
        }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn first_moments(&self) -> &[Array2<f64>] {
        &self.m
    }

    pub fn second_moments(&self) -> &[Array2<f64>] {
        &self.v
    }

    /// One Adam step: `W <- W - lr * m_hat / (sqrt(v_hat) + eps)`, with the
    /// directions read as gradients.
    pub fn step(&mut self, net: &mut Network, directions: &[Array2<f64>]) -> Result<()> {
        if directions.len() != self.m.len()
            || directions
                .iter()
                .zip(&self.m)
                .any(|(g, m)| g.dim() != m.dim())
            || net
                .weights()
                .iter()
                .zip(&self.m)
                .any(|(w, m)| w.dim() != m.dim())
        {
            return Err(Error::Shape(
                "directions, moments and weights disagree in shape".into(),
            ));
        }
        if directions.iter().any(|g| g.iter().any(|v| !v.is_finite())) {
            return Err(Error::Numerical("non-finite update direction".into()));
        }
        self.t += 1;
        let AdamConfig {
            lr,
            beta1,
            beta2,
            eps,
        } = self.config;
        let t = self.t as i32;
        let bc1 = 1.0 - beta1.powi(t);
        let bc2 = 1.0 - beta2.powi(t);
        for (((w, g), m), v) in net
            .weights_mut()
            .iter_mut()
            .zip(directions)
            .zip(&mut self.m)
            .zip(&mut self.v)
        {
            Zip::from(w).and(g).and(m).and(v).for_each(|w, &g, m, v| {
                *m = beta1 * *m + (1.0 - beta1) * g;
                *v = beta2 * *v + (1.0 - beta2) * g * g;
                let m_hat = *m / bc1;
                let v_hat = *v / bc2;
                *w -= lr * m_hat / (v_hat.sqrt() + eps);
            });
        }
        Ok(())
    }
}

/// What gets handed to Adam as the "gradient".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateSource {
    /// dL/dW of the binary cross-entropy.
    Gradient,
    /// The negated STDP update, so that Adam's descent step applies `+ΔW`.
    StdpRule,
}

/// Batch-mean update directions, shaped like the network's weights.
///
/// Per-sample contributions are summed in batch order and then divided by
/// the batch size.
pub fn make_directions(
    source: UpdateSource,
    net: &Network,
    traces: &[ForwardTrace],
    labels: &[Label],
    assoc: &AssociativityMap,
    params: &RuleParams,
) -> Result<Vec<Array2<f64>>> {
    if traces.len() != labels.len() {
        return Err(Error::Shape(format!(
            "{} traces but {} labels",
            traces.len(),
            labels.len()
        )));
    }
    if traces.is_empty() {
        return Err(Error::EmptyDataset("empty batch".into()));
    }
    let mut acc: Vec<Array2<f64>> = net
        .weights()
        .iter()
        .map(|w| Array2::zeros(w.dim()))
        .collect();
    match source {
        UpdateSource::Gradient => {
            for (trace, &label) in traces.iter().zip(labels) {
                net.accumulate_bce_grads(trace, label, &mut acc)?;
            }
        }
        UpdateSource::StdpRule => {
            if !assoc.widths().eq(net.layer_dims()[1..].iter().copied()) {
                return Err(Error::Shape(
                    "associativity map does not match network".into(),
                ));
            }
            for (trace, &label) in traces.iter().zip(labels) {
                net.check_trace(trace)?;
                for (l, a) in acc.iter_mut().enumerate() {
                    let signs = assoc.effective_signs(l + 1, label)?;
                    accumulate_layer_update(
                        a,
                        trace.activations[l].view(),
                        trace.activations[l + 1].view(),
                        &signs,
                        params,
                    )?;
                }
            }
        }
    }
    let n = traces.len() as f64;
    let sign = match source {
        UpdateSource::Gradient => 1.0,
        UpdateSource::StdpRule => -1.0,
    };
    for a in &mut acc {
        a.mapv_inplace(|v| sign * v / n);
    }
    Ok(acc)
}
