//! Spike datasets: generators, encoders, loaders and the `SNNT` container.

mod idx;
mod snnt;
mod synthetic;
mod ttfs;
mod yinyang;

pub use idx::{load_mnist_idx, parse_idx_images, parse_idx_labels, IDX_IMAGES_MAGIC, IDX_LABELS_MAGIC};
pub use snnt::{load_spikes, read_spikes, save_spikes, write_spikes, SNNT_MAGIC, SNNT_VERSION};
pub use synthetic::{gen_synthetic, DEFAULT_RATE_RANGE};
pub use ttfs::{ttfs_encode, ttfs_spike_time, TtfsEncoderCfg};
pub use yinyang::{gen_yinyang, yinyang_class, YinYangClass};

use crate::numerics::{Real, Tensor};
use crate::{Error, Result};

/// Anything the training loop can draw labelled spike batches from.
pub trait SpikeSource<T: Real> {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn inputs(&self) -> usize;

    fn steps(&self) -> usize;

    fn classes(&self) -> usize;

    fn labels(&self) -> &[usize];

    /// Spikes `[indices.len(), inputs, steps]` and the matching labels.
    fn batch(&self, indices: &[usize]) -> Result<(Tensor<T>, Vec<usize>)>;
}

fn check_labels(labels: &[usize], classes: usize) -> Result<()> {
    match labels.iter().find(|&&l| l >= classes) {
        Some(l) => Err(Error::Label(format!("label {l} outside [0, {classes})"))),
        None => Ok(()),
    }
}

fn check_indices(indices: &[usize], len: usize) -> Result<()> {
    match indices.iter().find(|&&i| i >= len) {
        Some(i) => Err(Error::Dimension {
            op: "batch",
            lhs: vec![*i],
            rhs: vec![len],
        }),
        None => Ok(()),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetMeta {
    pub steps: usize,
    pub dt_ms: f64,
    pub inputs: usize,
    pub classes: usize,
    /// Free-form name of the encoder that produced the spikes.
    pub encoder: String,
    pub seed: u64,
}

/// Binary spikes held bit-packed along time, one packed row per (sample, input).
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    pub meta: DatasetMeta,
    labels: Vec<usize>,
    bits: Vec<u8>,
}

pub(crate) fn row_bytes(steps: usize) -> usize {
    steps.div_ceil(8)
}

impl EncodedDataset {
    /// Packs a binary `[B, N, T]` tensor. `meta.inputs`/`meta.steps` are taken from the tensor.
    pub fn from_spikes<T: Real>(spikes: &Tensor<T>, labels: Vec<usize>, mut meta: DatasetMeta) -> Result<Self> {
        let [b, n, t] = spikes.dims3("EncodedDataset")?;
        spikes.ensure_binary("dataset spikes")?;
        if !labels.is_empty() && labels.len() != b {
            return Err(Error::Length {
                expected: b,
                found: labels.len(),
            });
        }
        check_labels(&labels, meta.classes)?;
        meta.inputs = n;
        meta.steps = t;
        let rb = row_bytes(t);
        let mut bits = vec![0u8; b * n * rb];
        for (r, chunk) in bits.chunks_mut(rb.max(1)).enumerate().take(b * n) {
            for (k, &v) in spikes.data()[r * t..(r + 1) * t].iter().enumerate() {
                if v == T::one() {
                    chunk[k / 8] |= 1 << (k % 8);
                }
            }
        }
        Ok(EncodedDataset { meta, labels, bits })
    }

    pub(crate) fn from_raw(meta: DatasetMeta, labels: Vec<usize>, bits: Vec<u8>) -> Self {
        EncodedDataset { meta, labels, bits }
    }

    pub(crate) fn packed(&self) -> &[u8] {
        &self.bits
    }

    pub fn samples(&self) -> usize {
        let per = self.meta.inputs * row_bytes(self.meta.steps);
        if per == 0 {
            0
        } else {
            self.bits.len() / per
        }
    }

    /// Unpacks everything into one tensor.
    pub fn spikes<T: Real>(&self) -> Tensor<T> {
        let idx: Vec<usize> = (0..self.samples()).collect();
        self.unpack(&idx)
    }

    fn unpack<T: Real>(&self, indices: &[usize]) -> Tensor<T> {
        let (n, t) = (self.meta.inputs, self.meta.steps);
        let rb = row_bytes(t);
        let mut out = Tensor::zeros(&[indices.len(), n, t]);
        for (bo, &bi) in indices.iter().enumerate() {
            for j in 0..n {
                let src = &self.bits[(bi * n + j) * rb..(bi * n + j + 1) * rb];
                let dst = out.row_mut(bo, j);
                for (k, d) in dst.iter_mut().enumerate() {
                    if src[k / 8] >> (k % 8) & 1 == 1 {
                        *d = T::one();
                    }
                }
            }
        }
        out
    }
}

impl<T: Real> SpikeSource<T> for EncodedDataset {
    fn len(&self) -> usize {
        self.samples()
    }

    fn inputs(&self) -> usize {
        self.meta.inputs
    }

    fn steps(&self) -> usize {
        self.meta.steps
    }

    fn classes(&self) -> usize {
        self.meta.classes
    }

    fn labels(&self) -> &[usize] {
        &self.labels
    }

    fn batch(&self, indices: &[usize]) -> Result<(Tensor<T>, Vec<usize>)> {
        check_indices(indices, self.samples())?;
        if self.labels.len() != self.samples() {
            return Err(Error::Label(format!(
                "dataset has {} samples but {} labels",
                self.samples(),
                self.labels.len()
            )));
        }
        Ok((self.unpack(indices), indices.iter().map(|&i| self.labels[i]).collect()))
    }
}

/// Analog samples that are TTFS-encoded on demand, one batch at a time.
#[derive(Debug, Clone, PartialEq)]
pub struct TtfsDataset {
    values: Vec<f32>,
    labels: Vec<usize>,
    inputs: usize,
    classes: usize,
    pub encoder: TtfsEncoderCfg,
}

impl TtfsDataset {
    /// `values` is row-major `[labels.len(), inputs]`, each within `[0, i_max]`.
    pub fn new(values: Vec<f32>, inputs: usize, labels: Vec<usize>, classes: usize, encoder: TtfsEncoderCfg) -> Result<Self> {
        encoder.validate()?;
        if values.len() != labels.len() * inputs {
            return Err(Error::Length {
                expected: labels.len() * inputs,
                found: values.len(),
            });
        }
        check_labels(&labels, classes)?;
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0 && f64::from(**v) <= encoder.i_max)) {
            return Err(Error::Encoding(format!("intensity {v} outside [0, {}]", encoder.i_max)));
        }
        Ok(TtfsDataset {
            values,
            labels,
            inputs,
            classes,
            encoder,
        })
    }

    pub fn from_tensor<T: Real>(values: &Tensor<T>, labels: Vec<usize>, classes: usize, encoder: TtfsEncoderCfg) -> Result<Self> {
        let [_, d] = values.dims2("TtfsDataset")?;
        let flat = values.data().iter().map(|v| v.as_f64() as f32).collect();
        TtfsDataset::new(flat, d, labels, classes, encoder)
    }

    /// The first `n` samples.
    pub fn take(&self, n: usize) -> TtfsDataset {
        let n = n.min(self.labels.len());
        TtfsDataset {
            values: self.values[..n * self.inputs].to_vec(),
            labels: self.labels[..n].to_vec(),
            ..self.clone()
        }
    }

    pub fn values(&self) -> &[f32] {
        &self.values
    }

    /// Encodes every sample into a packed dataset.
    pub fn encode_all(&self, dt_ms: f64, seed: u64) -> Result<EncodedDataset> {
        let idx: Vec<usize> = (0..self.labels.len()).collect();
        let (spikes, labels) = SpikeSource::<f32>::batch(self, &idx)?;
        EncodedDataset::from_spikes(
            &spikes,
            labels,
            DatasetMeta {
                steps: self.encoder.steps,
                dt_ms,
                inputs: self.inputs,
                classes: self.classes,
                encoder: "ttfs".into(),
                seed,
            },
        )
    }
}

impl<T: Real> SpikeSource<T> for TtfsDataset {
    fn len(&self) -> usize {
        self.labels.len()
    }

    fn inputs(&self) -> usize {
        self.inputs
    }

    fn steps(&self) -> usize {
        self.encoder.steps
    }

    fn classes(&self) -> usize {
        self.classes
    }

    fn labels(&self) -> &[usize] {
        &self.labels
    }

    fn batch(&self, indices: &[usize]) -> Result<(Tensor<T>, Vec<usize>)> {
        check_indices(indices, self.labels.len())?;
        let (d, steps) = (self.inputs, self.encoder.steps);
        let mut out = Tensor::zeros(&[indices.len(), d, steps]);
        for (bo, &bi) in indices.iter().enumerate() {
            for j in 0..d {
                let v = f64::from(self.values[bi * d + j]);
                if let Some(t) = ttfs_spike_time(v, &self.encoder)? {
                    out.row_mut(bo, j)[t] = T::one();
                }
            }
        }
        Ok((out, indices.iter().map(|&i| self.labels[i]).collect()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn meta(classes: usize) -> DatasetMeta {
        DatasetMeta {
            steps: 0,
            dt_ms: 1.0,
            inputs: 0,
            classes,
            encoder: "test".into(),
            seed: 0,
        }
    }

    #[test]
    fn packing_round_trips_odd_lengths() {
        for t in [1, 7, 8, 9, 17] {
            let s = Tensor::<f64>::from_fn(&[3, 2, t], |k| ((k * 7 + 3) % 5 == 0) as u8 as f64);
            let ds = EncodedDataset::from_spikes(&s, vec![0, 1, 2], meta(3)).unwrap();
            assert_eq!(ds.samples(), 3);
            assert_eq!(ds.spikes::<f64>(), s);
            let (b, l) = SpikeSource::<f32>::batch(&ds, &[2, 0]).unwrap();
            assert_eq!(l, vec![2, 0]);
            assert_eq!(b.row(0, 1), s.cast::<f32>().row(2, 1));
        }
    }

    #[test]
    fn bad_labels_and_indices() {
        let s = Tensor::<f64>::zeros(&[2, 1, 4]);
        assert!(matches!(
            EncodedDataset::from_spikes(&s, vec![0, 3], meta(3)),
            Err(Error::Label(_))
        ));
        let ds = EncodedDataset::from_spikes(&s, vec![0, 1], meta(3)).unwrap();
        assert!(SpikeSource::<f32>::batch(&ds, &[5]).is_err());
    }

    #[test]
    fn lazy_ttfs_matches_eager_encoding() {
        let enc = TtfsEncoderCfg { i_max: 1.0, steps: 10 };
        let vals = Tensor::<f64>::from_vec(&[2, 3], vec![1.0, 0.0, 0.35, 0.5, 0.99, 0.05]).unwrap();
        let ds = TtfsDataset::from_tensor(&vals, vec![1, 0], 2, enc).unwrap();
        let (lazy, _) = SpikeSource::<f64>::batch(&ds, &[0, 1]).unwrap();
        let eager = ttfs_encode(&vals, &enc).unwrap();
        assert_eq!(lazy, eager);
        assert_eq!(ds.encode_all(1.0, 0).unwrap().spikes::<f64>(), eager);
        assert!(TtfsDataset::new(vec![1.5], 1, vec![0], 1, enc).is_err());
    }
}
