//! Bias-free fully connected sigmoid network with a single output neuron.

use ndarray::{Array1, Array2, ArrayView1, Axis, Zip};
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rule::sigmoid;

/// Probabilities are clamped into `[P_FLOOR, 1 - P_FLOOR]` when the loss
/// value is computed. Gradients never see the clamp.
pub const P_FLOOR: f64 = 1e-12;

/// Binary label. `Zero` is the first class of a pair, `One` the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Label {
    Zero,
    One,
}

impl Label {
    pub fn from_bool(one: bool) -> Label {
        if one {
            Label::One
        } else {
            Label::Zero
        }
    }

    pub fn target(self) -> f64 {
        match self {
            Label::Zero => 0.0,
            Label::One => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    layer_dims: Vec<usize>,
    /// `weights[l][[j, i]]` connects neuron `i` of layer `l` to neuron `j`
    /// of layer `l + 1`.
    weights: Vec<Array2<f64>>,
}

/// Everything a forward pass computed, kept for the update rules.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    /// `activations[0]` is the input; the last entry holds the single output.
    pub activations: Vec<Array1<f64>>,
    /// `pre_activations[l]` feeds `activations[l + 1]`.
    pub pre_activations: Vec<Array1<f64>>,
}

impl ForwardTrace {
    pub fn output(&self) -> f64 {
        self.activations.last().expect("trace has an output layer")[0]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    /// Same shapes as the network's weights.
    pub weights: Vec<Array2<f64>>,
    /// dL/d(input).
    pub input: Array1<f64>,
}

fn check_dims(layer_dims: &[usize]) -> Result<()> {
    if layer_dims.len() < 2 {
        return Err(Error::Config(format!(
            "need at least an input and an output layer, got {layer_dims:?}"
        )));
    }
    if layer_dims.contains(&0) {
        return Err(Error::Config(format!("zero-width layer in {layer_dims:?}")));
    }
    if *layer_dims.last().unwrap() != 1 {
        return Err(Error::Config(format!(
            "output layer must have exactly one neuron, got {layer_dims:?}"
        )));
    }
    Ok(())
}

impl Network {
    /// Glorot-uniform initialisation, fully determined by `seed`.
    pub fn init(layer_dims: &[usize], seed: u64) -> Result<Network> {
        check_dims(layer_dims)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let weights = layer_dims
            .windows(2)
            .map(|pair| {
                let (n_in, n_out) = (pair[0], pair[1]);
                let bound = (6.0 / (n_in + n_out) as f64).sqrt();
                let dist = Uniform::new_inclusive(-bound, bound);
                Array2::from_shape_simple_fn((n_out, n_in), || dist.sample(&mut rng))
            })
            .collect();
        Ok(Network {
            layer_dims: layer_dims.to_vec(),
            weights,
        })
    }

    /// Builds a network from explicit weight matrices.
    pub fn from_weights(weights: Vec<Array2<f64>>) -> Result<Network> {
        let first = weights
            .first()
            .ok_or_else(|| Error::Config("no weight matrices".into()))?;
        let mut layer_dims = vec![first.ncols()];
        for (l, w) in weights.iter().enumerate() {
            if w.ncols() != *layer_dims.last().unwrap() {
                return Err(Error::Shape(format!(
                    "weights[{l}] has {} columns, previous layer has {} neurons",
                    w.ncols(),
                    layer_dims.last().unwrap()
                )));
            }
            layer_dims.push(w.nrows());
        }
        check_dims(&layer_dims)?;
        if weights.iter().any(|w| w.iter().any(|v| !v.is_finite())) {
            return Err(Error::Numerical("non-finite weight".into()));
        }
        Ok(Network {
            layer_dims,
            weights,
        })
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn weights(&self) -> &[Array2<f64>] {
        &self.weights
    }

    /// Mutable access for optimizers. Shapes must not be changed.
    pub(crate) fn weights_mut(&mut self) -> &mut [Array2<f64>] {
        &mut self.weights
    }

    pub fn all_finite(&self) -> bool {
        self.weights.iter().all(|w| w.iter().all(|v| v.is_finite()))
    }

    pub fn forward(&self, input: ArrayView1<'_, f64>) -> Result<ForwardTrace> {
        if input.len() != self.input_dim() {
            return Err(Error::Shape(format!(
                "input has {} features, network expects {}",
                input.len(),
                self.input_dim()
            )));
        }
        let mut activations = Vec::with_capacity(self.layer_dims.len());
        let mut pre_activations = Vec::with_capacity(self.weights.len());
        activations.push(input.to_owned());
        for w in &self.weights {
            let z = w.dot(activations.last().unwrap());
            activations.push(z.mapv(sigmoid));
            pre_activations.push(z);
        }
        Ok(ForwardTrace {
            activations,
            pre_activations,
        })
    }

    pub fn output(&self, input: ArrayView1<'_, f64>) -> Result<f64> {
        Ok(self.forward(input)?.output())
    }

    /// Class 1 when the output is at least 0.5.
    pub fn predict(&self, input: ArrayView1<'_, f64>) -> Result<Label> {
        Ok(classify(self.output(input)?))
    }

    /// Gradients of the binary cross-entropy with respect to every weight and
    /// to the input, for a trace produced by [`Network::forward`] on `self`.
    pub fn backprop_bce(&self, trace: &ForwardTrace, label: Label) -> Result<Gradients> {
        let mut grads = Vec::with_capacity(self.weights.len());
        let input = self.backward(trace, label, true, |_, delta, pre| {
            grads.push(
                delta
                    .view()
                    .insert_axis(Axis(1))
                    .dot(&pre.view().insert_axis(Axis(0))),
            );
        })?;
        grads.reverse();
        Ok(Gradients {
            weights: grads,
            input: input.expect("input gradient requested"),
        })
    }

    /// Adds the BCE weight gradients for one sample into `acc` in place,
    /// skipping the input gradient.
    pub(crate) fn accumulate_bce_grads(
        &self,
        trace: &ForwardTrace,
        label: Label,
        acc: &mut [Array2<f64>],
    ) -> Result<()> {
        if acc.len() != self.weights.len()
            || acc
                .iter()
                .zip(&self.weights)
                .any(|(a, w)| a.dim() != w.dim())
        {
            return Err(Error::Shape(
                "gradient accumulator does not match network".into(),
            ));
        }
        self.backward(trace, label, false, |l, delta, pre| {
            for (mut row, &d) in acc[l].rows_mut().into_iter().zip(delta) {
                row.scaled_add(d, pre);
            }
        })?;
        Ok(())
    }

    /// Walks the layers from the output down, handing `visit` the layer
    /// index, the error at that layer's output and its input activations.
    /// Returns the input gradient when `want_input` is set.
    fn backward(
        &self,
        trace: &ForwardTrace,
        label: Label,
        want_input: bool,
        mut visit: impl FnMut(usize, &Array1<f64>, &Array1<f64>),
    ) -> Result<Option<Array1<f64>>> {
        self.check_trace(trace)?;
        // Sigmoid output with BCE: dL/dz at the output is p - y.
        let mut delta = Array1::from_elem(1, trace.output() - label.target());
        for l in (0..self.weights.len()).rev() {
            let pre = &trace.activations[l];
            visit(l, &delta, pre);
            if l == 0 && !want_input {
                return Ok(None);
            }
            let mut back = self.weights[l].t().dot(&delta);
            if l > 0 {
                Zip::from(&mut back)
                    .and(pre)
                    .for_each(|b, &a| *b *= a * (1.0 - a));
            }
            delta = back;
        }
        Ok(Some(delta))
    }

    pub(crate) fn check_trace(&self, trace: &ForwardTrace) -> Result<()> {
        let ok = trace.activations.len() == self.layer_dims.len()
            && trace
                .activations
                .iter()
                .zip(&self.layer_dims)
                .all(|(a, &n)| a.len() == n);
        if ok {
            Ok(())
        } else {
            Err(Error::Shape(
                "forward trace does not match network dimensions".into(),
            ))
        }
    }
}

#[inline]
pub fn classify(output: f64) -> Label {
    Label::from_bool(output >= 0.5)
}

/// Binary cross-entropy of a single prediction.
pub fn bce_loss(p: f64, label: Label) -> f64 {
    let p = p.clamp(P_FLOOR, 1.0 - P_FLOOR);
    match label {
        Label::One => -p.ln(),
        Label::Zero => -(1.0 - p).ln(),
    }
}
