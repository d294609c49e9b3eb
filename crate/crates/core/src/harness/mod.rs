//! Experiment orchestration: configuration, training loops, model files and
//! report emission.

mod config;
mod persist;
mod report;
mod train;

pub use config::{DatasetKind, ExperimentConfig, Method, Seeds, HIDDEN_LAYERS};
pub use persist::{load_model, read_model, save_model, write_model, MODEL_HEADER};
pub use report::{
    comparison_table, emit_reports, write_adversarial_csv, write_metrics_csv, RunRecord,
};
pub use train::{evaluate, load_pair, train, train_with, EpochMetrics, TrainOutcome};
