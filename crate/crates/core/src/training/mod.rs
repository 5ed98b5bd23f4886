//! Network assembly, loss, optimizer and the epoch loop.

mod checkpoint;
mod config;
mod network;
mod optim;
mod readout;
mod run;
mod trainer;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, SNNC_MAGIC, SNNC_VERSION};
pub use config::{AdamConfig, InitScheme, ModelVariant, NetworkConfig, ReadoutMode, TrainConfig};
pub use network::{init_params, LayerTrace, NetTrace, Network};
pub use optim::{adam_step, adam_update, lr_schedule, AdamState};
pub use readout::{one_hot, readout_backward, readout_forward, softmax, softmax_xent, ReadoutOutput};
pub use trainer::{evaluate, train, BestSnapshot, EpochMetrics, EvalMetrics, MetricsLog, Trainer};
pub use run::{
    load_mnist, load_splits, mnist_dir, run_training, yinyang_splits, DatasetSpec, RunConfig, RunSummary, Splits, MNIST_DIR_ENV,
};
