//! Small MLP trainer driving the losses and schedules end to end.
//!
//! Inputs are feature vectors; the network is one ReLU hidden layer with an
//! optional DropOut or DropBlock mask on the hidden units.

mod adam;
mod checkpoint;
mod data;
mod model;
mod regularize;
mod train;

pub use adam::{adam_step, AdamConfig, OptimizerState};
pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC, CHECKPOINT_VERSION};
pub use data::{make_synthetic, oversample_indices, read_features, write_features, Dataset, SyntheticSpec};
pub use model::{backward, backward_into, forward, Forward, ModelParams};
pub use regularize::{
    dropblock_mask, dropblock_seed_rate, dropout_mask, square_side, zeros_form_blocks, RegularizerConfig,
    RegularizerKind,
};
pub use train::{confusion, train, write_epoch_log, EpochRecord, TrainConfig, TrainOutput};
