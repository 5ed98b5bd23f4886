//! `SNNC` checkpoint container.
//!
//! Little-endian: magic `SNNC`, version `u32`, JSON header length `u32` and
//! the header (configs, epoch, best-loss record, optimizer step, metrics),
//! then a `u32` tensor count and per tensor: name (`u32` length + UTF-8),
//! dtype byte (0 = f32, 1 = f64), rank `u32`, dims `u64` each, raw values.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AdamState, BestSnapshot, MetricsLog, Network, NetworkConfig, TrainConfig, Trainer};
use crate::numerics::{DType, Real, Tensor};
use crate::seq::LayerParams;
use crate::{Error, Result};

pub const SNNC_MAGIC: [u8; 4] = *b"SNNC";
pub const SNNC_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    network: NetworkConfig,
    train: TrainConfig,
    epoch: usize,
    best_epoch: Option<usize>,
    best_loss: Option<f64>,
    adam_step: u64,
    log: MetricsLog,
}

fn put_u32(out: &mut Vec<u8>, v: usize) -> Result<()> {
    let v = u32::try_from(v).map_err(|_| Error::Format(format!("{v} does not fit in u32")))?;
    out.extend(v.to_le_bytes());
    Ok(())
}

fn put_tensor<T: Real>(out: &mut Vec<u8>, name: &str, t: &Tensor<T>) -> Result<()> {
    put_u32(out, name.len())?;
    out.extend(name.as_bytes());
    out.push(match T::DTYPE {
        DType::F32 => 0,
        DType::F64 => 1,
    });
    put_u32(out, t.shape().len())?;
    for &d in t.shape() {
        out.extend((d as u64).to_le_bytes());
    }
    out.extend(T::to_le_bytes_vec(t.data()));
    Ok(())
}

fn layer_tensors<'a, T>(prefix: &str, layers: &'a [LayerParams<T>]) -> Vec<(String, &'a Tensor<T>)> {
    layers
        .iter()
        .enumerate()
        .flat_map(|(l, p)| {
            [
                (format!("{prefix}.{l}.weights"), &p.weights),
                (format!("{prefix}.{l}.bias"), &p.bias),
                (format!("{prefix}.{l}.beta"), &p.beta),
            ]
        })
        .collect()
}

pub fn write_checkpoint<T: Real>(mut w: impl Write, tr: &Trainer<T>) -> Result<()> {
    let header = Header {
        network: tr.net.cfg.clone(),
        train: tr.cfg.clone(),
        epoch: tr.epoch,
        best_epoch: tr.best.as_ref().map(|b| b.epoch),
        best_loss: tr.best.as_ref().map(|b| b.loss),
        adam_step: tr.adam.step,
        log: tr.log.clone(),
    };
    let json = serde_json::to_vec(&header).map_err(|e| Error::Format(e.to_string()))?;
    let mut tensors = layer_tensors("layer", &tr.net.layers);
    if let Some(b) = &tr.best {
        tensors.extend(layer_tensors("best", &b.layers));
    }
    for (k, (m, v)) in tr.adam.m.iter().zip(&tr.adam.v).enumerate() {
        tensors.push((format!("adam.m.{k}"), m));
        tensors.push((format!("adam.v.{k}"), v));
    }
    let mut out = Vec::new();
    out.extend(SNNC_MAGIC);
    out.extend(SNNC_VERSION.to_le_bytes());
    put_u32(&mut out, json.len())?;
    out.extend(&json);
    put_u32(&mut out, tensors.len())?;
    for (name, t) in &tensors {
        put_tensor(&mut out, name, t)?;
    }
    w.write_all(&out)?;
    Ok(())
}

struct Cursor<'a> {
    buf: &'a [u8],
    at: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.at.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or(Error::Length {
            expected: self.at.saturating_add(n),
            found: self.buf.len(),
        })?;
        let s = &self.buf[self.at..end];
        self.at = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<usize> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]) as usize)
    }

    fn u64(&mut self) -> Result<usize> {
        let b = self.take(8)?;
        usize::try_from(u64::from_le_bytes(b.try_into().expect("8 bytes")))
            .map_err(|_| Error::Format("dimension overflows usize".into()))
    }

    fn tensor<T: Real>(&mut self) -> Result<(String, Tensor<T>)> {
        let len = self.u32()?;
        let name = String::from_utf8(self.take(len)?.to_vec()).map_err(|e| Error::Format(e.to_string()))?;
        let dtype = self.take(1)?[0];
        let rank = self.u32()?;
        let shape = (0..rank).map(|_| self.u64()).collect::<Result<Vec<_>>>()?;
        let count = shape
            .iter()
            .try_fold(1usize, |a, &d| a.checked_mul(d))
            .ok_or_else(|| Error::Format(format!("tensor {name} shape {shape:?} overflows")))?;
        let overflow = || Error::Format(format!("tensor {name} is too large"));
        let values: Vec<T> = match dtype {
            0 => f32::from_le_slice(self.take(count.checked_mul(4).ok_or_else(overflow)?)?)
                .into_iter()
                .map(|v| T::lit(f64::from(v)))
                .collect(),
            1 => f64::from_le_slice(self.take(count.checked_mul(8).ok_or_else(overflow)?)?)
                .into_iter()
                .map(T::lit)
                .collect(),
            d => return Err(Error::Format(format!("tensor {name} has unknown dtype {d}"))),
        };
        Ok((name, Tensor::from_vec(&shape, values)?))
    }
}

fn layers_from<T: Real>(
    tensors: &mut HashMap<String, Tensor<T>>,
    prefix: &str,
    count: usize,
    trainable_beta: bool,
) -> Result<Vec<LayerParams<T>>> {
    let mut get = |name: String| tensors.remove(&name).ok_or_else(|| Error::Format(format!("missing tensor {name}")));
    (0..count)
        .map(|l| {
            LayerParams::new(
                get(format!("{prefix}.{l}.weights"))?,
                get(format!("{prefix}.{l}.bias"))?,
                get(format!("{prefix}.{l}.beta"))?,
                trainable_beta,
            )
        })
        .collect()
}

pub fn read_checkpoint<T: Real>(mut r: impl Read) -> Result<Trainer<T>> {
    let mut buf = Vec::new();
    r.read_to_end(&mut buf)?;
    let mut c = Cursor { buf: &buf, at: 0 };
    let magic = c.take(4)?;
    if magic != SNNC_MAGIC {
        return Err(Error::Format(format!("bad magic {magic:?}, expected \"SNNC\"")));
    }
    let version = c.u32()?;
    if version != SNNC_VERSION as usize {
        return Err(Error::Format(format!("unsupported checkpoint version {version}")));
    }
    let len = c.u32()?;
    let header: Header = serde_json::from_slice(c.take(len)?).map_err(|e| Error::Format(format!("checkpoint header: {e}")))?;
    let count = c.u32()?;
    let mut tensors = HashMap::with_capacity(count);
    for _ in 0..count {
        let (name, t) = c.tensor::<T>()?;
        tensors.insert(name, t);
    }
    let n_layers = header.network.layers.len();
    let trainable = header.network.trainable_beta;
    let layers = layers_from(&mut tensors, "layer", n_layers, trainable)?;
    let best = match (header.best_epoch, header.best_loss) {
        (Some(epoch), Some(loss)) => Some(BestSnapshot {
            epoch,
            loss,
            layers: layers_from(&mut tensors, "best", n_layers, trainable)?,
        }),
        _ => None,
    };
    let net = Network::from_params(header.network, layers)?;
    let mut adam = AdamState::for_layers(header.train.adam, &net.layers);
    adam.step = header.adam_step;
    for k in 0..adam.m.len() {
        for (which, slot) in [("m", &mut adam.m[k]), ("v", &mut adam.v[k])] {
            let t = tensors
                .remove(&format!("adam.{which}.{k}"))
                .ok_or_else(|| Error::Format(format!("missing tensor adam.{which}.{k}")))?;
            if t.shape() != slot.shape() {
                return Err(Error::dim("read_checkpoint", t.shape(), slot.shape()));
            }
            *slot = t;
        }
    }
    Ok(Trainer {
        net,
        cfg: header.train,
        adam,
        epoch: header.epoch,
        best,
        log: header.log,
    })
}

pub fn save_checkpoint<T: Real>(path: impl AsRef<Path>, tr: &Trainer<T>) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_checkpoint(&mut f, tr)?;
    f.flush()?;
    Ok(())
}

pub fn load_checkpoint<T: Real>(path: impl AsRef<Path>) -> Result<Trainer<T>> {
    read_checkpoint(std::io::BufReader::new(std::fs::File::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{gen_yinyang, TtfsDataset, TtfsEncoderCfg};
    use crate::training::{ModelVariant, NetworkConfig};

    fn trained() -> (Trainer<f32>, TtfsDataset) {
        let (x, y) = gen_yinyang::<f32>(24, 3).unwrap();
        let data = TtfsDataset::from_tensor(&x, y, 3, TtfsEncoderCfg { i_max: 1.0, steps: 10 }).unwrap();
        let net = NetworkConfig::dense(4, &[8, 3], ModelVariant::FastSingle, 10, 1.0);
        let cfg = TrainConfig {
            epochs: 3,
            lr: 1e-2,
            batch_size: 8,
            milestones: vec![2],
            adam: Default::default(),
        };
        let mut t = Trainer::from_config(net, cfg).unwrap();
        t.run_epoch(&data).unwrap();
        (t, data)
    }

    #[test]
    fn round_trip_and_resume_matches_uninterrupted_run() {
        let (mut a, data) = trained();
        let mut bytes = Vec::new();
        write_checkpoint(&mut bytes, &a).unwrap();
        let mut b: Trainer<f32> = read_checkpoint(&bytes[..]).unwrap();
        assert_eq!(b.net, a.net);
        assert_eq!(b.adam, a.adam);
        assert_eq!(b.best, a.best);
        assert_eq!(b.log, a.log);
        a.run(&data).unwrap();
        b.run(&data).unwrap();
        assert_eq!(a.net.layers, b.net.layers);
    }

    #[test]
    fn loads_into_double_precision() {
        let (a, _) = trained();
        let mut bytes = Vec::new();
        write_checkpoint(&mut bytes, &a).unwrap();
        let b: Trainer<f64> = read_checkpoint(&bytes[..]).unwrap();
        assert_eq!(b.net.cast::<f32>().layers, a.net.layers);
    }

    #[test]
    fn corruption_is_detected() {
        let (a, _) = trained();
        let mut bytes = Vec::new();
        write_checkpoint(&mut bytes, &a).unwrap();
        assert!(matches!(read_checkpoint::<f32>(&bytes[..bytes.len() - 3]), Err(Error::Length { .. })));
        let mut bad = bytes.clone();
        bad[1] = b'X';
        assert!(matches!(read_checkpoint::<f32>(&bad[..]), Err(Error::Format(_))));
    }
}
