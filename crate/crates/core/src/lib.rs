//! Training multi-layer sigmoid networks with a local, STDP-derived learning
//! rule, next to a backpropagation baseline.
//!
//! Each synapse is updated from the rates of its two endpoint neurons and a
//! fixed association sign on the post-synaptic neuron; no error signal
//! travels backwards through the network. Adam consumes the negated local
//! update in place of a gradient.
//!
//! - [`rule`]: the per-synapse update and its spike-timing form
//! - [`network`]: bias-free sigmoid MLP, forward pass and BCE backprop
//! - [`associativity`]: fixed per-neuron signs and layer-wide updates
//! - [`optimizer`]: Adam with a pluggable update source
//! - [`data`]: MNIST IDX and IRIS CSV loading, pair selection, batching
//! - [`attack`]: FGSM and adversarial accuracy
//! - [`harness`]: training loops, model files, reports

pub mod associativity;
pub mod attack;
pub mod data;
pub mod error;
pub mod harness;
pub mod network;
pub mod optimizer;
pub mod rule;

pub use associativity::{stdp_layer_update, AssociativityMap};
pub use attack::{adversarial_accuracy, fgsm, AdversarialPoint, AttackConfig};
pub use data::{DataPaths, Dataset, Split};
pub use error::{Error, Result};
pub use harness::{DatasetKind, EpochMetrics, ExperimentConfig, Method, Seeds, TrainOutcome};
pub use network::{ForwardTrace, Gradients, Label, Network};
pub use optimizer::{make_directions, AdamConfig, AdamState, UpdateSource};
pub use rule::{hebbian_core, sigmoid, stdp_curve, stdp_delta, CurveVariant, RuleParams, Sign};
