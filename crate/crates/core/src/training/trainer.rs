use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{adam_step, lr_schedule, one_hot, softmax_xent, AdamState, Network, NetworkConfig, ReadoutOutput, TrainConfig};
use crate::data::SpikeSource;
use crate::numerics::Real;
use crate::seq::LayerParams;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub lr: f64,
    /// Mean cross-entropy over the epoch's samples.
    pub loss: f64,
    pub accuracy: f64,
    /// Hidden spikes / (hidden neurons × samples).
    pub hidden_spikes_per_neuron: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub samples: usize,
    pub loss: f64,
    pub accuracy: f64,
    pub hidden_spikes_per_neuron: f64,
    /// Hidden spikes per sample.
    pub hidden_spikes_per_sample: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsLog {
    pub epochs: Vec<EpochMetrics>,
}

/// Parameters with the lowest epoch training loss seen so far.
#[derive(Debug, Clone, PartialEq)]
pub struct BestSnapshot<T> {
    pub epoch: usize,
    pub loss: f64,
    pub layers: Vec<LayerParams<T>>,
}

/// A network plus everything needed to continue training it.
#[derive(Debug, Clone)]
pub struct Trainer<T> {
    pub net: Network<T>,
    pub cfg: TrainConfig,
    pub adam: AdamState<T>,
    /// Number of completed epochs.
    pub epoch: usize,
    pub best: Option<BestSnapshot<T>>,
    pub log: MetricsLog,
}

fn per_neuron(spikes: f64, neurons: usize, samples: usize) -> f64 {
    if neurons == 0 || samples == 0 {
        0.0
    } else {
        spikes / (neurons * samples) as f64
    }
}

impl<T: Real> Trainer<T> {
    pub fn new(net: Network<T>, cfg: TrainConfig) -> Result<Self> {
        cfg.validate()?;
        let adam = AdamState::for_layers(cfg.adam, &net.layers);
        Ok(Trainer {
            net,
            cfg,
            adam,
            epoch: 0,
            best: None,
            log: MetricsLog::default(),
        })
    }

    pub fn from_config(net_cfg: NetworkConfig, cfg: TrainConfig) -> Result<Self> {
        Trainer::new(Network::new(net_cfg)?, cfg)
    }

    /// One pass over `data` in a seeded random order.
    pub fn run_epoch(&mut self, data: &dyn SpikeSource<T>) -> Result<EpochMetrics> {
        self.net.cfg.check_data(data.inputs(), data.steps(), data.classes())?;
        let epoch = self.epoch;
        if self.cfg.milestones.contains(&epoch) {
            if let Some(best) = &self.best {
                self.net.layers = best.layers.clone();
            }
        }
        let lr = lr_schedule(epoch, &self.cfg.milestones, self.cfg.lr);
        let mut order: Vec<usize> = (0..data.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.net.cfg.seed);
        rng.set_stream(epoch as u64);
        order.shuffle(&mut rng);

        let start = Instant::now();
        let classes = self.net.cfg.classes();
        let (mut loss_sum, mut correct, mut spikes) = (0.0, 0usize, 0.0);
        for (bi, idx) in order.chunks(self.cfg.batch_size).enumerate() {
            let (x, labels) = data.batch(idx)?;
            let trace = self.net.forward(&x)?;
            let out = ReadoutOutput::new(self.net.scores(&trace)?)?;
            let (loss, grad) = softmax_xent(&out.o, &one_hot(&labels, classes)?)?;
            if !loss.is_finite() {
                return Err(Error::Numeric(format!("non-finite loss {loss} in batch {bi} of epoch {epoch}")));
            }
            let grads = self.net.backward(&x, &trace, &grad)?;
            adam_step(&mut self.net.layers, &grads, &mut self.adam, lr)
                .map_err(|e| Error::Numeric(format!("batch {bi} of epoch {epoch}: {e}")))?;
            loss_sum += loss.as_f64() * idx.len() as f64;
            correct += out.predictions().iter().zip(&labels).filter(|(p, l)| p == l).count();
            spikes += trace.hidden_spikes();
        }
        let n = data.len();
        let m = EpochMetrics {
            epoch,
            lr,
            loss: if n == 0 { 0.0 } else { loss_sum / n as f64 },
            accuracy: if n == 0 { 0.0 } else { correct as f64 / n as f64 },
            hidden_spikes_per_neuron: per_neuron(spikes, self.net.cfg.hidden_neurons(), n),
            seconds: start.elapsed().as_secs_f64(),
        };
        if self.best.as_ref().is_none_or(|b| m.loss < b.loss) {
            self.best = Some(BestSnapshot {
                epoch,
                loss: m.loss,
                layers: self.net.layers.clone(),
            });
        }
        self.epoch += 1;
        self.log.epochs.push(m.clone());
        Ok(m)
    }

    /// Runs the remaining configured epochs.
    pub fn run(&mut self, data: &dyn SpikeSource<T>) -> Result<&MetricsLog> {
        while self.epoch < self.cfg.epochs {
            self.run_epoch(data)?;
        }
        Ok(&self.log)
    }
}

/// Trains a freshly initialized network for `cfg.epochs` epochs.
pub fn train<T: Real>(net_cfg: NetworkConfig, cfg: TrainConfig, data: &dyn SpikeSource<T>) -> Result<Trainer<T>> {
    let mut t = Trainer::from_config(net_cfg, cfg)?;
    t.run(data)?;
    Ok(t)
}

/// Loss, accuracy and hidden activity over all of `data`, in order.
pub fn evaluate<T: Real>(net: &Network<T>, data: &dyn SpikeSource<T>, batch_size: usize) -> Result<EvalMetrics> {
    net.cfg.check_data(data.inputs(), data.steps(), data.classes())?;
    let classes = net.cfg.classes();
    let (mut loss_sum, mut correct, mut spikes) = (0.0, 0usize, 0.0);
    let order: Vec<usize> = (0..data.len()).collect();
    for idx in order.chunks(batch_size.max(1)) {
        let (x, labels) = data.batch(idx)?;
        let trace = net.forward(&x)?;
        let out = ReadoutOutput::new(net.scores(&trace)?)?;
        let (loss, _) = softmax_xent(&out.o, &one_hot(&labels, classes)?)?;
        loss_sum += loss.as_f64() * idx.len() as f64;
        correct += out.predictions().iter().zip(&labels).filter(|(p, l)| p == l).count();
        spikes += trace.hidden_spikes();
    }
    let n = data.len();
    let frac = |v: f64| if n == 0 { 0.0 } else { v / n as f64 };
    Ok(EvalMetrics {
        samples: n,
        loss: frac(loss_sum),
        accuracy: frac(correct as f64),
        hidden_spikes_per_neuron: per_neuron(spikes, net.cfg.hidden_neurons(), n),
        hidden_spikes_per_sample: frac(spikes),
    })
}
