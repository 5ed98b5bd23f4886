use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::neuron::DEFAULT_SURROGATE_SLOPE;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelVariant {
    /// Convolutional no-reset layers with first-spike extraction.
    FastSingle,
    /// Time-stepped simulation, single-spike gate.
    SeqSingle,
    /// Time-stepped simulation, unconstrained spiking.
    SeqMulti,
}

impl ModelVariant {
    pub fn id(self) -> &'static str {
        match self {
            ModelVariant::FastSingle => "fast-single",
            ModelVariant::SeqSingle => "seq-single",
            ModelVariant::SeqMulti => "seq-multi",
        }
    }
}

impl fmt::Display for ModelVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for ModelVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" | "fast-single" => Ok(ModelVariant::FastSingle),
            "seq" | "seq-single" => Ok(ModelVariant::SeqSingle),
            "seq-multi" | "multi" => Ok(ModelVariant::SeqMulti),
            other => Err(Error::Config(format!(
                "unknown model {other:?} (expected fast-single, seq-single or seq-multi)"
            ))),
        }
    }
}

/// How the readout potential trace becomes a class score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReadoutMode {
    Sum,
    Max,
}

impl FromStr for ReadoutMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sum" => Ok(ReadoutMode::Sum),
            "max" => Ok(ReadoutMode::Max),
            other => Err(Error::Config(format!("unknown readout {other:?} (expected sum or max)"))),
        }
    }
}

/// Weight initialization; biases always start at zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum InitScheme {
    /// `U(-√(1/fan_in), √(1/fan_in))`
    #[default]
    Uniform,
    /// `U(-√(2/fan_in), √(2/fan_in))`
    Wide,
    /// Spiking layers start at zero (no activity); the readout uses `Uniform`.
    Zero,
}

fn default_slope() -> f64 {
    DEFAULT_SURROGATE_SLOPE
}

fn default_tau_hidden() -> f64 {
    10.0
}

fn default_tau_readout() -> f64 {
    20.0
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub inputs: usize,
    /// Sizes of every layer after the input; the last one is the readout.
    pub layers: Vec<usize>,
    pub variant: ModelVariant,
    pub steps: usize,
    /// ms
    pub dt: f64,
    #[serde(default = "default_slope")]
    pub surrogate_slope: f64,
    pub readout: ReadoutMode,
    #[serde(default = "default_true")]
    pub trainable_beta: bool,
    #[serde(default)]
    pub init: InitScheme,
    #[serde(default = "default_tau_hidden")]
    pub tau_hidden: f64,
    #[serde(default = "default_tau_readout")]
    pub tau_readout: f64,
    #[serde(default)]
    pub seed: u64,
}

impl NetworkConfig {
    /// A dense network with sum readout, trainable β and the default time constants.
    pub fn dense(inputs: usize, layers: &[usize], variant: ModelVariant, steps: usize, dt: f64) -> Self {
        NetworkConfig {
            inputs,
            layers: layers.to_vec(),
            variant,
            steps,
            dt,
            surrogate_slope: DEFAULT_SURROGATE_SLOPE,
            readout: ReadoutMode::Sum,
            trainable_beta: true,
            init: InitScheme::Uniform,
            tau_hidden: default_tau_hidden(),
            tau_readout: default_tau_readout(),
            seed: 0,
        }
    }

    pub fn classes(&self) -> usize {
        self.layers.last().copied().unwrap_or(0)
    }

    pub fn hidden_neurons(&self) -> usize {
        self.layers[..self.layers.len().saturating_sub(1)].iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() || self.layers.contains(&0) || self.inputs == 0 {
            return Err(Error::Config(format!(
                "need at least a readout layer and nonzero sizes, got inputs={} layers={:?}",
                self.inputs, self.layers
            )));
        }
        if self.steps == 0 {
            return Err(Error::Config("steps must be at least 1".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.surrogate_slope > 0.0) {
            return Err(Error::Config(format!("surrogate slope must be positive, got {}", self.surrogate_slope)));
        }
        if !(self.tau_hidden > 0.0 && self.tau_readout > 0.0) {
            return Err(Error::Config("time constants must be positive".into()));
        }
        Ok(())
    }

    /// Checks that a dataset of this shape fits the network.
    pub fn check_data(&self, inputs: usize, steps: usize, classes: usize) -> Result<()> {
        if inputs != self.inputs || steps != self.steps || classes > self.classes() {
            return Err(Error::Config(format!(
                "data has {inputs} inputs, {steps} steps, {classes} classes; network expects {}, {}, {}",
                self.inputs,
                self.steps,
                self.classes()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub lr: f64,
    pub batch_size: usize,
    /// Epochs (0-based) at which the rate drops tenfold.
    #[serde(default)]
    pub milestones: Vec<usize>,
    #[serde(default)]
    pub adam: AdamConfig,
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch size must be at least 1".into()));
        }
        if !(self.lr > 0.0) {
            return Err(Error::Config(format!("learning rate must be positive, got {}", self.lr)));
        }
        if self.milestones.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!(
                "milestones must be strictly increasing, got {:?}",
                self.milestones
            )));
        }
        let a = &self.adam;
        if !((0.0..1.0).contains(&a.beta1) && (0.0..1.0).contains(&a.beta2) && a.eps > 0.0) {
            return Err(Error::Config(format!("invalid Adam moments {a:?}")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn variant_names_round_trip() {
        for v in [ModelVariant::FastSingle, ModelVariant::SeqSingle, ModelVariant::SeqMulti] {
            assert_eq!(v.id().parse::<ModelVariant>().unwrap(), v);
            let js = serde_json::to_string(&v).unwrap();
            assert_eq!(js, format!("\"{}\"", v.id()));
        }
        assert!("gpu".parse::<ModelVariant>().is_err());
    }

    #[test]
    fn validation() {
        let mut c = NetworkConfig::dense(4, &[120, 3], ModelVariant::FastSingle, 100, 1.0);
        c.validate().unwrap();
        assert_eq!(c.classes(), 3);
        assert_eq!(c.hidden_neurons(), 120);
        c.steps = 0;
        assert!(c.validate().is_err());
        let t = TrainConfig {
            epochs: 1,
            lr: 1e-3,
            batch_size: 4,
            milestones: vec![50, 50],
            adam: AdamConfig::default(),
        };
        assert!(t.validate().is_err());
    }

    #[test]
    fn defaults_fill_in_from_json() {
        let c: NetworkConfig = serde_json::from_str(
            r#"{"inputs":4,"layers":[10,3],"variant":"seq-multi","steps":20,"dt":1.0,"readout":"max"}"#,
        )
        .unwrap();
        assert_eq!(c.surrogate_slope, 10.0);
        assert!(c.trainable_beta);
        assert_eq!(c.tau_readout, 20.0);
    }
}
