//! File-driven training runs: a JSON config names the dataset, the network
//! and the optimizer, and the runner writes checkpoints and metrics.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{
    evaluate, save_checkpoint, AdamConfig, EpochMetrics, EvalMetrics, InitScheme, ModelVariant, NetworkConfig,
    ReadoutMode, TrainConfig, Trainer,
};
use crate::data::{gen_yinyang, load_mnist_idx, load_spikes, SpikeSource, TtfsDataset, TtfsEncoderCfg};
use crate::neuron::DEFAULT_SURROGATE_SLOPE;
use crate::numerics::Real;
use crate::{Error, Result};

/// Environment variable naming the directory with the four MNIST IDX files.
pub const MNIST_DIR_ENV: &str = "ONESPIKE_MNIST_DIR";

/// Where the samples of a run come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DatasetSpec {
    /// Generated on the fly and TTFS-encoded; the test split uses `seed + 1`.
    YinYang {
        #[serde(default = "default_yy_train")]
        train: usize,
        #[serde(default = "default_yy_test")]
        test: usize,
        #[serde(default)]
        seed: u64,
    },
    /// IDX files, TTFS-encoded per batch. `dir` falls back to `$ONESPIKE_MNIST_DIR`, then `data/mnist`.
    Mnist {
        #[serde(default)]
        dir: Option<PathBuf>,
        #[serde(default)]
        train_limit: Option<usize>,
        #[serde(default)]
        test_limit: Option<usize>,
    },
    /// Pre-encoded spike files.
    Snnt {
        train: PathBuf,
        #[serde(default)]
        test: Option<PathBuf>,
    },
}

fn default_yy_train() -> usize {
    20_000
}

fn default_yy_test() -> usize {
    10_000
}

fn default_slope() -> f64 {
    DEFAULT_SURROGATE_SLOPE
}

fn default_true() -> bool {
    true
}

fn default_batch() -> usize {
    128
}

fn default_lr() -> f64 {
    1e-3
}

fn default_dt() -> f64 {
    1.0
}

/// Everything `train --config` reads.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub dataset: DatasetSpec,
    /// Layer sizes after the input; the last is the readout.
    pub layers: Vec<usize>,
    #[serde(rename = "T")]
    pub steps: usize,
    #[serde(default = "default_dt")]
    pub dt: f64,
    #[serde(default = "default_lr")]
    pub lr: f64,
    pub epochs: usize,
    #[serde(default)]
    pub milestones: Vec<usize>,
    #[serde(default = "default_batch")]
    pub batch: usize,
    #[serde(default = "default_output")]
    pub output: ReadoutMode,
    #[serde(default = "default_variant")]
    pub variant: ModelVariant,
    #[serde(default = "default_slope")]
    pub surrogate_slope: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub trainable_beta: bool,
    #[serde(default)]
    pub init: InitScheme,
    /// Receives `model.snnc` after every epoch and `metrics.json` at the end.
    #[serde(default)]
    pub checkpoint_dir: Option<PathBuf>,
}

fn default_output() -> ReadoutMode {
    ReadoutMode::Sum
}

fn default_variant() -> ModelVariant {
    ModelVariant::FastSingle
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.network(0)?.validate()?;
        cfg.train_config().validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        RunConfig::from_json(&text)
    }

    pub fn network(&self, inputs: usize) -> Result<NetworkConfig> {
        let mut net = NetworkConfig::dense(inputs.max(1), &self.layers, self.variant, self.steps, self.dt);
        net.readout = self.output;
        net.surrogate_slope = self.surrogate_slope;
        net.trainable_beta = self.trainable_beta;
        net.init = self.init;
        net.seed = self.seed;
        Ok(net)
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            epochs: self.epochs,
            lr: self.lr,
            batch_size: self.batch,
            milestones: self.milestones.clone(),
            adam: AdamConfig::default(),
        }
    }
}

/// A training split and an optional held-out split.
pub struct Splits<T> {
    pub train: Box<dyn SpikeSource<T>>,
    pub test: Option<Box<dyn SpikeSource<T>>>,
}

/// The MNIST directory from an explicit path, the environment, or `data/mnist`.
pub fn mnist_dir(explicit: Option<&Path>) -> PathBuf {
    explicit
        .map(Path::to_path_buf)
        .or_else(|| std::env::var_os(MNIST_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("data/mnist"))
}

/// Train and test MNIST as lazily encoded TTFS datasets.
pub fn load_mnist(dir: &Path, steps: usize, train_limit: Option<usize>, test_limit: Option<usize>) -> Result<(TtfsDataset, TtfsDataset)> {
    let enc = TtfsEncoderCfg { i_max: 1.0, steps };
    let load = |img: &str, lab: &str, limit: Option<usize>| -> Result<TtfsDataset> {
        let (x, y) = load_mnist_idx::<f32>(dir.join(img), dir.join(lab))?;
        let ds = TtfsDataset::from_tensor(&x, y, 10, enc)?;
        Ok(match limit {
            Some(n) => ds.take(n),
            None => ds,
        })
    };
    Ok((
        load("train-images-idx3-ubyte", "train-labels-idx1-ubyte", train_limit)?,
        load("t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte", test_limit)?,
    ))
}

/// Yin-Yang train/test splits TTFS-encoded over `steps` bins.
pub fn yinyang_splits(train: usize, test: usize, seed: u64, steps: usize) -> Result<(TtfsDataset, TtfsDataset)> {
    let enc = TtfsEncoderCfg { i_max: 1.0, steps };
    let (x, y) = gen_yinyang::<f64>(train, seed)?;
    let tr = TtfsDataset::from_tensor(&x, y, 3, enc)?;
    let (x, y) = gen_yinyang::<f64>(test, seed.wrapping_add(1))?;
    Ok((tr, TtfsDataset::from_tensor(&x, y, 3, enc)?))
}

pub fn load_splits<T: Real>(spec: &DatasetSpec, steps: usize) -> Result<Splits<T>> {
    Ok(match spec {
        DatasetSpec::YinYang { train, test, seed } => {
            let (tr, te) = yinyang_splits(*train, *test, *seed, steps)?;
            Splits {
                train: Box::new(tr),
                test: (*test > 0).then(|| Box::new(te) as Box<dyn SpikeSource<T>>),
            }
        }
        DatasetSpec::Mnist {
            dir,
            train_limit,
            test_limit,
        } => {
            let (tr, te) = load_mnist(&mnist_dir(dir.as_deref()), steps, *train_limit, *test_limit)?;
            Splits {
                train: Box::new(tr),
                test: Some(Box::new(te)),
            }
        }
        DatasetSpec::Snnt { train, test } => Splits {
            train: Box::new(load_spikes(train)?),
            test: match test {
                Some(p) => Some(Box::new(load_spikes(p)?)),
                None => None,
            },
        },
    })
}

/// Outcome of [`run_training`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: RunConfig,
    pub epochs: Vec<EpochMetrics>,
    pub test: Option<EvalMetrics>,
}

/// Trains as configured, calling `on_epoch` after every epoch, and evaluates
/// on the test split if there is one.
pub fn run_training<T: Real>(cfg: &RunConfig, mut on_epoch: impl FnMut(&EpochMetrics)) -> Result<(Trainer<T>, RunSummary)> {
    let splits = load_splits::<T>(&cfg.dataset, cfg.steps)?;
    let net = cfg.network(splits.train.inputs())?;
    net.check_data(splits.train.inputs(), splits.train.steps(), splits.train.classes())?;
    let mut trainer = Trainer::<T>::from_config(net, cfg.train_config())?;
    if let Some(dir) = &cfg.checkpoint_dir {
        std::fs::create_dir_all(dir)?;
    }
    while trainer.epoch < trainer.cfg.epochs {
        let m = trainer.run_epoch(splits.train.as_ref())?;
        on_epoch(&m);
        if let Some(dir) = &cfg.checkpoint_dir {
            save_checkpoint(dir.join("model.snnc"), &trainer)?;
        }
    }
    let test = match &splits.test {
        Some(t) => Some(evaluate(&trainer.net, t.as_ref(), 1024)?),
        None => None,
    };
    let summary = RunSummary {
        config: cfg.clone(),
        epochs: trainer.log.epochs.clone(),
        test,
    };
    if let Some(dir) = &cfg.checkpoint_dir {
        let body = serde_json::to_string_pretty(&summary).map_err(|e| Error::Format(e.to_string()))?;
        std::fs::write(dir.join("metrics.json"), body)?;
    }
    Ok((trainer, summary))
}
