//! Discrete SGD on the one-hidden-layer ReLU network.

mod dataset;
mod experiments;
mod modes;
mod network;
mod train;

pub use dataset::{
    make_dataset, make_multiclass_dataset, max_multiclass_half_angle, SeparabilityReport, SeparableDataset,
    DATASET_FORMAT_VERSION,
};
pub use experiments::{
    degenerate_setup, mode_fleet, starvation_experiment, starvation_experiment_from, FleetSpec, FleetSummary,
    StarvationInit, StarvationOutcome,
};
pub use modes::{check_mode_independence, compliant_init, make_cross_active, ModeMonitor, ModeReport};
pub use network::{sgd_step, Loss, NetworkParams, OutputWeights};
pub use train::{train, train_with_observer, HistoryRecord, LogitHistory, Mode, Sampling, TrainConfig, TrainResult};
