use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{readout_backward, readout_forward, InitScheme, ModelVariant, NetworkConfig};
use crate::fastpath::{
    fast_layer_backward, fast_layer_forward, fast_readout_backward, fast_readout_forward, FastLayerTrace,
    FastReadoutTrace,
};
use crate::neuron::beta_from_tau;
use crate::numerics::{ConvBackend, Real, Tensor};
use crate::seq::{seq_layer_backward, seq_layer_forward, Firing, LayerGrads, LayerParams, SeqLayerTrace, SpikeMode};
use crate::{Error, Result};

/// Seeded initial parameters for every layer of `cfg`.
pub fn init_params<T: Real>(cfg: &NetworkConfig) -> Result<Vec<LayerParams<T>>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut fan_in = cfg.inputs;
    let last = cfg.layers.len() - 1;
    let mut layers = Vec::with_capacity(cfg.layers.len());
    for (l, &n) in cfg.layers.iter().enumerate() {
        let bound = match cfg.init {
            InitScheme::Zero if l < last => 0.0,
            InitScheme::Uniform | InitScheme::Zero => (1.0 / fan_in as f64).sqrt(),
            InitScheme::Wide => (2.0 / fan_in as f64).sqrt(),
        };
        let weights = Tensor::from_fn(&[n, fan_in], |_| {
            if bound > 0.0 {
                T::lit(rng.random_range(-bound..bound))
            } else {
                T::zero()
            }
        });
        let tau = if l < last { cfg.tau_hidden } else { cfg.tau_readout };
        let beta = T::lit(beta_from_tau(tau, cfg.dt)?);
        layers.push(LayerParams::new(weights, Tensor::zeros(&[n]), Tensor::full(&[n], beta), cfg.trainable_beta)?);
        fan_in = n;
    }
    Ok(layers)
}

/// Saved forward state of one layer.
#[derive(Debug, Clone)]
pub enum LayerTrace<T> {
    Seq(SeqLayerTrace<T>),
    Fast(FastLayerTrace<T>),
    FastReadout(FastReadoutTrace<T>),
}

impl<T: Real> LayerTrace<T> {
    /// Spikes of a hidden layer, potentials of the readout.
    pub fn output(&self) -> &Tensor<T> {
        match self {
            LayerTrace::Seq(t) => t.output(),
            LayerTrace::Fast(t) => &t.out_spikes,
            LayerTrace::FastReadout(t) => &t.v,
        }
    }
}

#[derive(Debug, Clone)]
pub struct NetTrace<T> {
    pub layers: Vec<LayerTrace<T>>,
}

impl<T: Real> NetTrace<T> {
    /// Potentials `[B, C, T]` of the readout layer.
    pub fn readout_v(&self) -> &Tensor<T> {
        self.layers.last().expect("network has a readout").output()
    }

    /// Total spikes emitted by all hidden layers.
    pub fn hidden_spikes(&self) -> f64 {
        self.layers[..self.layers.len() - 1]
            .iter()
            .map(|l| l.output().data().iter().map(|v| v.as_f64()).sum::<f64>())
            .sum()
    }
}

/// A feed-forward stack of LIF layers ending in a non-spiking readout.
#[derive(Debug, Clone, PartialEq)]
pub struct Network<T> {
    pub cfg: NetworkConfig,
    pub layers: Vec<LayerParams<T>>,
    pub backend: ConvBackend,
}

impl<T: Real> Network<T> {
    pub fn new(cfg: NetworkConfig) -> Result<Self> {
        let layers = init_params(&cfg)?;
        Ok(Network {
            cfg,
            layers,
            backend: ConvBackend::Auto,
        })
    }

    pub fn from_params(cfg: NetworkConfig, layers: Vec<LayerParams<T>>) -> Result<Self> {
        cfg.validate()?;
        let mut fan_in = cfg.inputs;
        if layers.len() != cfg.layers.len() {
            return Err(Error::Config(format!("{} layer sizes but {} parameter sets", cfg.layers.len(), layers.len())));
        }
        for (p, &n) in layers.iter().zip(&cfg.layers) {
            p.validate()?;
            if p.weights.shape() != [n, fan_in] {
                return Err(Error::dim("Network::from_params", p.weights.shape(), &[n, fan_in]));
            }
            fan_in = n;
        }
        Ok(Network {
            cfg,
            layers,
            backend: ConvBackend::Auto,
        })
    }

    pub fn forward(&self, input: &Tensor<T>) -> Result<NetTrace<T>> {
        let [_, n_in, steps] = input.dims3("Network::forward")?;
        if n_in != self.cfg.inputs || steps != self.cfg.steps {
            return Err(Error::dim("Network::forward", input.shape(), &[self.cfg.inputs, self.cfg.steps]));
        }
        let last = self.layers.len() - 1;
        let mut traces: Vec<LayerTrace<T>> = Vec::with_capacity(self.layers.len());
        for (l, p) in self.layers.iter().enumerate() {
            let x = traces.last().map_or(input, |t| t.output());
            let trace = match (self.cfg.variant, l == last) {
                (ModelVariant::FastSingle, false) => LayerTrace::Fast(fast_layer_forward(x, p, self.backend)?),
                (ModelVariant::FastSingle, true) => LayerTrace::FastReadout(fast_readout_forward(x, p, self.backend)?),
                (_, true) => LayerTrace::Seq(seq_layer_forward(x, p, Firing::Readout)?),
                (ModelVariant::SeqSingle, false) => {
                    LayerTrace::Seq(seq_layer_forward(x, p, Firing::Spiking(SpikeMode::Single))?)
                }
                (ModelVariant::SeqMulti, false) => {
                    LayerTrace::Seq(seq_layer_forward(x, p, Firing::Spiking(SpikeMode::Multi))?)
                }
            };
            traces.push(trace);
        }
        Ok(NetTrace { layers: traces })
    }

    /// Class scores `[B, C]`.
    pub fn scores(&self, trace: &NetTrace<T>) -> Result<Tensor<T>> {
        readout_forward(trace.readout_v(), self.cfg.readout)
    }

    /// Parameter gradients given the gradient w.r.t. the class scores.
    pub fn backward(&self, input: &Tensor<T>, trace: &NetTrace<T>, grad_scores: &Tensor<T>) -> Result<Vec<LayerGrads<T>>> {
        let grad_v = readout_backward(grad_scores, trace.readout_v(), self.cfg.readout)?;
        self.backward_from_potentials(input, trace, &grad_v)
    }

    /// Parameter gradients given the gradient w.r.t. the last layer's output.
    pub fn backward_from_potentials(&self, input: &Tensor<T>, trace: &NetTrace<T>, grad_top: &Tensor<T>) -> Result<Vec<LayerGrads<T>>> {
        if trace.layers.len() != self.layers.len() {
            return Err(Error::State(format!(
                "trace has {} layers, network has {}",
                trace.layers.len(),
                self.layers.len()
            )));
        }
        let slope = T::lit(self.cfg.surrogate_slope);
        let mut grads = Vec::with_capacity(self.layers.len());
        let mut upstream = grad_top.clone();
        for l in (0..self.layers.len()).rev() {
            let x = if l == 0 { input } else { trace.layers[l - 1].output() };
            let p = &self.layers[l];
            let mut g = match &trace.layers[l] {
                LayerTrace::Seq(t) => seq_layer_backward(t, x, p, &upstream, slope, l > 0)?,
                LayerTrace::Fast(t) => fast_layer_backward(t, x, p, &upstream, slope, l > 0, self.backend)?,
                LayerTrace::FastReadout(t) => fast_readout_backward(t, x, p, &upstream, l > 0, self.backend)?,
            };
            if let Some(gi) = g.input.take() {
                upstream = gi;
            }
            grads.push(g);
        }
        grads.reverse();
        Ok(grads)
    }

    pub fn cast<U: Real>(&self) -> Network<U> {
        Network {
            cfg: self.cfg.clone(),
            layers: self.layers.iter().map(|l| l.cast()).collect(),
            backend: self.backend,
        }
    }
}
